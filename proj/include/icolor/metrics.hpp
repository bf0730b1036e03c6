#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "icolor/image.hpp"

namespace icolor {

// Hasler-Susstrunk colorfulness on [0,1]-scaled RGB with population
// statistics: sqrt(var(rg)+var(yb)) + 0.3 sqrt(mean(rg)^2+mean(yb)^2),
// rg = R-G, yb = (R+G)/2 - B. Scores are not comparable across resolutions
// (resizing changes the statistics).
double colorfulness(const RgbImage& img);

struct DiversityReport {
    double mean_pairwise_chroma_l1 = 0.0;          // mean over pairs of mean |da|+|db|
    std::vector<double> per_image_colorfulness;
    double threshold = 0.0;
    bool diverse = false;
};

// Chroma spread across multiple colorizations of the same input.
DiversityReport diversity_report(const std::vector<RgbImage>& outputs, double threshold = 1.0);

struct ColorfulnessReport {
    std::string method;
    int count = 0;
    double mean = 0.0;
    std::map<std::string, double> scores;     // filename -> score
    std::vector<std::string> skipped;         // unreadable files
};

// Scores every PNG/JPEG in a directory; unreadable files are skipped and
// listed. Method name defaults to the directory basename.
ColorfulnessReport evaluate_directory(const std::filesystem::path& results_dir, std::string method = "");

// {method: {mean, count, scores: {...}}} with deterministic key order.
std::string report_to_json(const std::vector<ColorfulnessReport>& reports);
void write_report(const std::filesystem::path& report_path, const std::vector<ColorfulnessReport>& reports);

struct PairingRow {
    std::string filename;
    std::string left_method, right_method;
};

// Randomized left/right pairing sheet over the images the two result
// directories share; the study template for preference comparisons.
std::vector<PairingRow> make_pairing_sheet(const std::filesystem::path& dir_a,
                                           const std::filesystem::path& dir_b, std::uint64_t seed);
std::string pairing_sheet_csv(const std::vector<PairingRow>& rows);

} // namespace icolor

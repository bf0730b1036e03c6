#include "icolor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icolor/colorspace.hpp"
#include "icolor/imageio.hpp"
#include "icolor/rng.hpp"

namespace icolor {

double colorfulness(const RgbImage& img) {
    require(img.height() >= 1 && img.width() >= 1, "colorfulness: empty image");
    if (!valid_unit_range(img)) throw std::domain_error("colorfulness: channel value outside [0,1]");

    const double n = static_cast<double>(img.r.size());
    double sum_rg = 0, sum_rg2 = 0, sum_yb = 0, sum_yb2 = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double r = img.r(y, x), g = img.g(y, x), b = img.b(y, x);
            const double rg = r - g;
            const double yb = 0.5 * (r + g) - b;
            sum_rg += rg;
            sum_rg2 += rg * rg;
            sum_yb += yb;
            sum_yb2 += yb * yb;
        }
    }
    const double mean_rg = sum_rg / n, mean_yb = sum_yb / n;
    const double var_rg = std::max(0.0, sum_rg2 / n - mean_rg * mean_rg);
    const double var_yb = std::max(0.0, sum_yb2 / n - mean_yb * mean_yb);
    return std::sqrt(var_rg + var_yb) + 0.3 * std::sqrt(mean_rg * mean_rg + mean_yb * mean_yb);
}

DiversityReport diversity_report(const std::vector<RgbImage>& outputs, double threshold) {
    require(outputs.size() >= 2, "diversity_report: need at least 2 outputs");
    for (size_t i = 1; i < outputs.size(); ++i)
        require(outputs[i].same_shape(outputs[0]), "diversity_report: output shapes differ");

    std::vector<LabImage> labs;
    labs.reserve(outputs.size());
    for (const auto& img : outputs) labs.push_back(rgb_to_lab(img));

    DiversityReport rep;
    rep.threshold = threshold;
    double total = 0.0;
    int pairs = 0;
    for (size_t i = 0; i < labs.size(); ++i) {
        for (size_t j = i + 1; j < labs.size(); ++j) {
            const double d = ((labs[i].a - labs[j].a).abs().cast<double>().sum() +
                              (labs[i].b - labs[j].b).abs().cast<double>().sum()) /
                             static_cast<double>(labs[i].a.size());
            total += d;
            ++pairs;
        }
    }
    rep.mean_pairwise_chroma_l1 = total / pairs;
    for (const auto& img : outputs) rep.per_image_colorfulness.push_back(colorfulness(img));
    rep.diverse = rep.mean_pairwise_chroma_l1 > threshold;
    return rep;
}

namespace {

bool has_image_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

} // namespace

ColorfulnessReport evaluate_directory(const std::filesystem::path& results_dir, std::string method) {
    ColorfulnessReport rep;
    rep.method = method.empty() ? results_dir.filename().string() : std::move(method);
    if (!std::filesystem::is_directory(results_dir))
        throw std::invalid_argument("evaluate_directory: not a directory: " + results_dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(results_dir))
        if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    double total = 0.0;
    for (const auto& f : files) {
        try {
            const double score = colorfulness(load_image(f));
            rep.scores[f.filename().string()] = score;
            total += score;
        } catch (const std::exception&) {
            rep.skipped.push_back(f.filename().string());
        }
    }
    rep.count = static_cast<int>(rep.scores.size());
    rep.mean = rep.count > 0 ? total / rep.count : 0.0;
    return rep;
}

std::string report_to_json(const std::vector<ColorfulnessReport>& reports) {
    nlohmann::ordered_json j;
    for (const auto& rep : reports) {
        nlohmann::ordered_json entry;
        entry["mean"] = rep.mean;
        entry["count"] = rep.count;
        nlohmann::ordered_json scores;
        for (const auto& [name, score] : rep.scores) scores[name] = score; // std::map keeps names sorted
        entry["scores"] = std::move(scores);
        if (!rep.skipped.empty()) entry["skipped"] = rep.skipped;
        j[rep.method] = std::move(entry);
    }
    return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& report_path, const std::vector<ColorfulnessReport>& reports) {
    const std::string text = report_to_json(reports);
    write_file(report_path, Bytes(text.begin(), text.end()));
}

std::vector<PairingRow> make_pairing_sheet(const std::filesystem::path& dir_a,
                                           const std::filesystem::path& dir_b, std::uint64_t seed) {
    auto list = [](const std::filesystem::path& dir) {
        std::vector<std::string> names;
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file() && has_image_extension(entry.path()))
                names.push_back(entry.path().filename().string());
        std::sort(names.begin(), names.end());
        return names;
    };
    const auto names_a = list(dir_a);
    const auto names_b = list(dir_b);
    std::vector<std::string> common;
    std::set_intersection(names_a.begin(), names_a.end(), names_b.begin(), names_b.end(),
                          std::back_inserter(common));

    const std::string method_a = dir_a.filename().string();
    const std::string method_b = dir_b.filename().string();
    Rng rng(Rng::combine(seed, 0x9a125));
    std::vector<PairingRow> rows;
    for (const auto& name : common) {
        const bool a_left = rng.uniform() < 0.5;
        rows.push_back({name, a_left ? method_a : method_b, a_left ? method_b : method_a});
    }
    return rows;
}

std::string pairing_sheet_csv(const std::vector<PairingRow>& rows) {
    std::ostringstream out;
    out << "filename,left,right\n";
    for (const auto& r : rows) out << r.filename << ',' << r.left_method << ',' << r.right_method << '\n';
    return out.str();
}

} // namespace icolor

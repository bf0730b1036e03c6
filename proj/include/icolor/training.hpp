#pragma once

#include <filesystem>
#include <iosfwd>

#include "icolor/loss.hpp"
#include "icolor/pipeline.hpp"
#include "icolor/simulation.hpp"

namespace icolor {

struct TrainConfig {
    double learning_rate = 2e-4;
    int batch_size = 2;
    int steps = 2000;
    std::uint64_t seed = 0;
    int crop = 128;
    int checkpoint_every = 500;
    MaskConfig mask;
    ColorizerConfig model;
    std::array<double, 5> loss_weights{0.2, 0.2, 0.2, 0.2, 0.2};
    std::string out_dir; // empty: no checkpoints or log files
};

// Key-value text config ("key = value", '#' comments); unknown keys are an
// error so typos fail fast. CLI overrides reuse the same setter.
TrainConfig load_train_config(const std::filesystem::path& path);
void set_train_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

struct TrainLogEntry {
    int step = 0;
    double loss = 0.0;
    double lr = 0.0;
    long wall_ms = 0;
};

std::string log_entry_json(const TrainLogEntry& entry);

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainResult {
    ColorizerModel model;
    std::vector<TrainLogEntry> log;
};

// Optimize the colorizer on simulated references built from the corpus.
// Deterministic per (config, corpus, seed) at fixed thread count. Throws
// TrainingError (after writing a diagnostic checkpoint) on non-finite loss.
TrainResult train(const std::vector<RgbImage>& corpus, const TrainConfig& cfg,
                  std::ostream* live_log = nullptr);

struct EvalConfig {
    PipelineParams pipeline;
    std::string dump_dir; // save result PNGs here when non-empty
};

struct EvalReport {
    int count = 0;
    double mean_colorfulness = 0.0;
    double mean_luminance_error = 0.0;
    std::vector<double> colorfulness;
    std::vector<double> luminance_error;
};

// Run the full pipeline (grayscale of each validation image as input) and
// aggregate colorfulness plus luminance-preservation error.
EvalReport evaluate_checkpoint(const ColorizerModel& model, const std::vector<RgbImage>& val_images,
                               const EvalConfig& cfg = {});

std::string eval_report_json(const EvalReport& report);

} // namespace icolor

#include "icolor/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icolor/imageio.hpp"
#include "icolor/imageops.hpp"
#include "icolor/metrics.hpp"
#include "icolor/nn/adam.hpp"
#include "icolor/nn/reconstruct.hpp"
#include "icolor/rng.hpp"

namespace icolor {

namespace {

std::array<int, 5> parse_widths(const std::string& value) {
    std::array<int, 5> widths{};
    std::stringstream ss(value);
    std::string item;
    size_t i = 0;
    while (std::getline(ss, item, ',')) {
        require(i < widths.size(), "config: expected 5 comma-separated widths");
        widths[i++] = std::stoi(item);
    }
    require(i == widths.size(), "config: expected 5 comma-separated widths");
    return widths;
}

std::array<double, 5> parse_weights(const std::string& value) {
    std::array<double, 5> w{};
    std::stringstream ss(value);
    std::string item;
    size_t i = 0;
    while (std::getline(ss, item, ',')) {
        require(i < w.size(), "config: expected 5 comma-separated weights");
        w[i++] = std::stod(item);
    }
    require(i == w.size(), "config: expected 5 comma-separated weights");
    return w;
}

} // namespace

void set_train_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "learning_rate") cfg.learning_rate = std::stod(value);
    else if (key == "batch_size") cfg.batch_size = std::stoi(value);
    else if (key == "steps") cfg.steps = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "crop") cfg.crop = std::stoi(value);
    else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "mask.min_coverage") cfg.mask.min_coverage = std::stod(value);
    else if (key == "mask.max_coverage") cfg.mask.max_coverage = std::stod(value);
    else if (key == "mask.min_regions") cfg.mask.min_regions = std::stoi(value);
    else if (key == "mask.max_regions") cfg.mask.max_regions = std::stoi(value);
    else if (key == "mask.blob_probability") cfg.mask.blob_probability = std::stod(value);
    else if (key == "unet.base") cfg.model.unet.base = std::stoi(value);
    else if (key == "unet.levels") cfg.model.unet.levels = std::stoi(value);
    else if (key == "extractor.widths") cfg.model.extractor.widths = parse_widths(value);
    else if (key == "extractor.seed") cfg.model.extractor.seed = std::stoull(value);
    else if (key == "warp.temperature") cfg.model.warp_temperature = std::stof(value);
    else if (key == "loss.weights") cfg.loss_weights = parse_weights(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(lineno) + " is not 'key = value'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        set_train_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::string log_entry_json(const TrainLogEntry& entry) {
    nlohmann::ordered_json j{
        {"step", entry.step}, {"loss", entry.loss}, {"lr", entry.lr}, {"wall_ms", entry.wall_ms}};
    return j.dump();
}

namespace {

struct CropView {
    Plane L;
    Chroma ab;
};

CropView crop_lab(const LabImage& lab, int y0, int x0, int size) {
    CropView v;
    v.L = crop(lab.L, y0, x0, size, size);
    v.ab.a = crop(lab.a, y0, x0, size, size);
    v.ab.b = crop(lab.b, y0, x0, size, size);
    return v;
}

} // namespace

TrainResult train(const std::vector<RgbImage>& corpus, const TrainConfig& cfg, std::ostream* live_log) {
    require(corpus.size() >= 2, "train: corpus must contain at least 2 images");
    require(cfg.batch_size >= 1, "train: batch_size must be positive");
    require(cfg.steps >= 0, "train: steps must be non-negative");
    require(cfg.crop >= cfg.model.unet.downscale_factor() &&
                cfg.crop % cfg.model.unet.downscale_factor() == 0,
            "train: crop must be a positive multiple of the network factor");
    for (const auto& img : corpus)
        require(img.height() >= cfg.crop && img.width() >= cfg.crop, "train: images smaller than crop");
    for (double w : cfg.loss_weights) require(w > 0.0, "train: loss weights must be positive");

    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

    TrainResult res{ColorizerModel(cfg.model, cfg.seed), {}};
    nn::UNet& net = res.model.net;
    const nn::FeatureExtractor& fe = *res.model.extractor;

    std::array<float, 5> lw;
    for (size_t i = 0; i < lw.size(); ++i) lw[i] = static_cast<float>(cfg.loss_weights[i]);

    std::vector<nn::ParamView<float>> params;
    net.collect(params);
    nn::Adam<float> opt(params, static_cast<float>(cfg.learning_rate));

    std::vector<LabImage> labs;
    labs.reserve(corpus.size());
    for (const auto& img : corpus) labs.push_back(rgb_to_lab(img));
    const int n = static_cast<int>(corpus.size());

    // ground-truth reconstructions are reusable when the crop is the whole image
    const bool cacheable = corpus[0].height() == cfg.crop && corpus[0].width() == cfg.crop;
    std::vector<nn::Tensor> gt_cache(cacheable ? corpus.size() : 0);

    const WarpConfig wcfg{cfg.model.warp_temperature, 4096};

    for (int step = 1; step <= cfg.steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        net.zero_grad();
        double batch_loss = 0.0;

        for (int k = 0; k < cfg.batch_size; ++k) {
            Rng pick(Rng::combine(cfg.seed, 0x51e9, static_cast<std::uint64_t>(step) * 64 + k));
            const int idx = static_cast<int>(pick.below(n));
            const int donor = static_cast<int>((idx + 1 + pick.below(static_cast<std::uint64_t>(n - 1))) % n);

            const LabImage& lab = labs[static_cast<size_t>(idx)];
            const LabImage& dlab = labs[static_cast<size_t>(donor)];
            const int sy = lab.height() > cfg.crop ? pick.range(0, lab.height() - cfg.crop - 1) : 0;
            const int sx = lab.width() > cfg.crop ? pick.range(0, lab.width() - cfg.crop - 1) : 0;
            const int dy = dlab.height() > cfg.crop ? pick.range(0, dlab.height() - cfg.crop - 1) : 0;
            const int dx = dlab.width() > cfg.crop ? pick.range(0, dlab.width() - cfg.crop - 1) : 0;
            const CropView src = crop_lab(lab, sy, sx, cfg.crop);
            const CropView fake = crop_lab(dlab, dy, dx, cfg.crop);

            const SimulationMask mask = sample_mask(
                cfg.crop, cfg.crop, Rng::combine(cfg.seed, 0x3a5c, static_cast<std::uint64_t>(step) * 64 + k),
                cfg.mask);
            const RgbImage r_prime = simulate_reference(src.L, src.ab, fake.ab, mask);

            const WarpedReference warped = warp_reference(Plane(src.L / 100.0f), r_prime, fe, wcfg);

            nn::UNet::Cache cache;
            const nn::Tensor out = net.forward(colorizer_input(src.L, warped), &cache);
            nn::Tensor ab(2, out.h, out.w);
            ab.data = out.data * kAbScale;

            nn::ReconstructCache<float> rc;
            const nn::Tensor pred_rgb = nn::lab_to_rgb_tensor<float>(src.L, ab, &rc);

            const nn::Tensor* gt_rgb = nullptr;
            nn::Tensor gt_local;
            if (cacheable) {
                auto& slot = gt_cache[static_cast<size_t>(idx)];
                if (slot.size() == 0) {
                    nn::Tensor gt_ab(2, cfg.crop, cfg.crop);
                    for (int y = 0; y < cfg.crop; ++y)
                        for (int x = 0; x < cfg.crop; ++x) {
                            gt_ab.at(0, y, x) = src.ab.a(y, x);
                            gt_ab.at(1, y, x) = src.ab.b(y, x);
                        }
                    slot = nn::lab_to_rgb_tensor<float>(src.L, gt_ab);
                }
                gt_rgb = &slot;
            } else {
                nn::Tensor gt_ab(2, cfg.crop, cfg.crop);
                for (int y = 0; y < cfg.crop; ++y)
                    for (int x = 0; x < cfg.crop; ++x) {
                        gt_ab.at(0, y, x) = src.ab.a(y, x);
                        gt_ab.at(1, y, x) = src.ab.b(y, x);
                    }
                gt_local = nn::lab_to_rgb_tensor<float>(src.L, gt_ab);
                gt_rgb = &gt_local;
            }

            nn::Tensor dpred;
            const float sample_loss = perceptual_loss_t<float>(pred_rgb, *gt_rgb, fe, lw, &dpred);
            batch_loss += static_cast<double>(sample_loss) / cfg.batch_size;

            dpred.data *= 1.0f / static_cast<float>(cfg.batch_size);
            nn::Tensor dab = nn::lab_to_rgb_tensor_backward<float>(rc, dpred);
            dab.data *= kAbScale;
            net.backward(cache, dab);
        }

        if (!std::isfinite(batch_loss)) {
            if (!cfg.out_dir.empty())
                save_checkpoint(std::filesystem::path(cfg.out_dir) / "diagnostic.ckpt", res.model);
            throw TrainingError("train: non-finite loss at step " + std::to_string(step));
        }
        opt.step();

        const auto t1 = std::chrono::steady_clock::now();
        TrainLogEntry entry{step, batch_loss, cfg.learning_rate,
                            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()};
        res.log.push_back(entry);
        if (live_log) (*live_log) << log_entry_json(entry) << "\n" << std::flush;

        if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
            save_checkpoint(std::filesystem::path(cfg.out_dir) / ("ckpt_" + std::to_string(step) + ".ckpt"),
                            res.model);
    }

    if (!cfg.out_dir.empty()) {
        save_checkpoint(std::filesystem::path(cfg.out_dir) / "model.ckpt", res.model);
        std::ofstream log_file(std::filesystem::path(cfg.out_dir) / "train_log.jsonl");
        for (const auto& entry : res.log) log_file << log_entry_json(entry) << "\n";
    }
    return res;
}

EvalReport evaluate_checkpoint(const ColorizerModel& model, const std::vector<RgbImage>& val_images,
                               const EvalConfig& cfg) {
    EvalReport rep;
    if (val_images.empty()) return rep;
    if (!cfg.dump_dir.empty()) std::filesystem::create_directories(cfg.dump_dir);

    double color_total = 0.0, lum_total = 0.0;
    for (size_t i = 0; i < val_images.size(); ++i) {
        const RgbImage gray = replicate_gray(luminance_of(val_images[i]));
        const Plane lum_in = luminance_of(gray);
        const PipelineResult out = run_pipeline(gray, cfg.pipeline, model);

        const double c = colorfulness(out.result);
        const double lerr = static_cast<double>((luminance_of(out.result) - lum_in).abs().mean());
        rep.colorfulness.push_back(c);
        rep.luminance_error.push_back(lerr);
        color_total += c;
        lum_total += lerr;

        if (!cfg.dump_dir.empty())
            save_png(std::filesystem::path(cfg.dump_dir) / ("val_" + std::to_string(i) + ".png"), out.result);
    }
    rep.count = static_cast<int>(val_images.size());
    rep.mean_colorfulness = color_total / rep.count;
    rep.mean_luminance_error = lum_total / rep.count;
    return rep;
}

std::string eval_report_json(const EvalReport& report) {
    nlohmann::ordered_json j{{"count", report.count},
                             {"mean_colorfulness", report.mean_colorfulness},
                             {"mean_luminance_error", report.mean_luminance_error},
                             {"colorfulness", report.colorfulness},
                             {"luminance_error", report.luminance_error}};
    return j.dump(2) + "\n";
}

} // namespace icolor

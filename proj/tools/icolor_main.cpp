#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include <nlohmann/json.hpp>

#include "icolor/imageops.hpp"
#include "icolor/metrics.hpp"
#include "icolor/service.hpp"
#include "icolor/training.hpp"

namespace fs = std::filesystem;
using namespace icolor;

namespace {

struct BackendOpts {
    std::string backend = "toy";
    std::string root;
    std::string command;
    std::string mode = "gray";

    void attach(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "reference backend: toy, dir, or cmd")
            ->check(CLI::IsMember({"toy", "dir", "cmd"}));
        cmd->add_option("--backend-root", root, "root directory for the dir backend");
        cmd->add_option("--backend-cmd", command, "command line for the cmd backend");
        cmd->add_option("--backend-mode", mode, "segmenter input mode for the cmd backend (gray|rgb)");
    }

    PipelineParams pipeline_params(const fs::path& input_path) const {
        PipelineParams p;
        p.segmenter = {BackendDescriptor::Kind::segmenter, backend, {}};
        p.generator = {BackendDescriptor::Kind::generator, backend, {}};
        if (backend == "dir") {
            p.segmenter.options = {{"root", root}, {"stem", input_path.stem().string()}};
            p.generator.options = p.segmenter.options;
        } else if (backend == "cmd") {
            p.segmenter.options = {{"command", command}, {"mode", mode}};
            p.generator.options = {{"command", command}};
        }
        return p;
    }
};

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    return seeds;
}

std::vector<RgbImage> load_corpus(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RgbImage> images;
    for (const auto& f : files) images.push_back(load_image(f));
    return images;
}

ColorizerModel model_or_default(const std::string& path) {
    if (!path.empty()) return load_checkpoint(path);
    std::cerr << "note: no --model given, using a fresh zero-chroma model\n";
    return ColorizerModel({}, 0);
}

int run(int argc, char** argv) {
    CLI::App app{"imagination-guided automatic colorization"};
    app.require_subcommand(1);

    // imagine ----------------------------------------------------------------
    auto* imagine = app.add_subcommand("imagine", "segment an image and sample color references");
    std::string imagine_input, imagine_out = "imagined", imagine_seeds;
    int imagine_n = 6;
    bool no_compose = false;
    BackendOpts imagine_backend;
    imagine->add_option("input", imagine_input, "grayscale or color input image")->required();
    imagine->add_option("-n", imagine_n, "number of references");
    imagine->add_option("--seeds", imagine_seeds, "comma-separated latent seeds (default 0..n-1)");
    imagine->add_option("-o,--out", imagine_out, "output directory");
    imagine->add_flag("--no-compose", no_compose, "skip luminance composition");
    imagine_backend.attach(imagine);

    // colorize ---------------------------------------------------------------
    auto* colorize_cmd = app.add_subcommand("colorize", "colorize an image");
    std::string col_input, col_ref, col_model, col_out = "colorized.png", col_seeds;
    int col_n = 6;
    BackendOpts col_backend;
    colorize_cmd->add_option("input", col_input, "input image")->required();
    colorize_cmd->add_option("--ref", col_ref, "reference image (skips the imagination stage)");
    colorize_cmd->add_option("--model", col_model, "colorizer checkpoint");
    colorize_cmd->add_option("-n", col_n, "number of references when imagining");
    colorize_cmd->add_option("--seeds", col_seeds, "comma-separated latent seeds");
    colorize_cmd->add_option("-o,--out", col_out, "output image path");
    col_backend.attach(colorize_cmd);

    // train ------------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train the colorizer on an image corpus");
    std::string train_config, train_corpus;
    std::vector<std::string> train_sets;
    train_cmd->add_option("--config", train_config, "key=value config file");
    train_cmd->add_option("--corpus", train_corpus, "directory of training images")->required();
    train_cmd->add_option("--set", train_sets, "config override key=value (wins over the file)");

    // evaluate ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "colorfulness report over result directories");
    std::vector<std::string> eval_dirs;
    std::string eval_out;
    double diversity_threshold = 1.0;
    bool eval_diversity = false;
    eval_cmd->add_option("dirs", eval_dirs, "result directories (one per method)")->required();
    eval_cmd->add_option("--out", eval_out, "write the JSON report here");
    eval_cmd->add_flag("--diversity", eval_diversity, "treat the directory as outputs of one input across seeds");
    eval_cmd->add_option("--diversity-threshold", diversity_threshold, "mean pairwise ab distance flag threshold");

    // pairs ------------------------------------------------------------------
    auto* pairs_cmd = app.add_subcommand("pairs", "export a randomized A/B pairing sheet (user-study template)");
    std::string pairs_a, pairs_b, pairs_out = "pairs.csv";
    std::uint64_t pairs_seed = 0;
    pairs_cmd->add_option("dir_a", pairs_a)->required();
    pairs_cmd->add_option("dir_b", pairs_b)->required();
    pairs_cmd->add_option("--seed", pairs_seed, "placement seed");
    pairs_cmd->add_option("--out", pairs_out, "output CSV path");

    // simulate ---------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "export a simulated training reference and its mask");
    std::string sim_image, sim_donor, sim_out = "simulated";
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("image", sim_image, "ground-truth color image")->required();
    sim_cmd->add_option("donor", sim_donor, "chroma donor image")->required();
    sim_cmd->add_option("--seed", sim_seed, "mask seed");
    sim_cmd->add_option("-o,--out", sim_out, "output directory");

    // serve ------------------------------------------------------------------
    auto* serve_cmd = app.add_subcommand("serve", "run the interactive-composition session API");
    std::string serve_state = "sessions", serve_model, serve_host = "127.0.0.1";
    int serve_port = 8080;
    serve_cmd->add_option("--port", serve_port, "listen port");
    serve_cmd->add_option("--host", serve_host, "bind address");
    serve_cmd->add_option("--state-dir", serve_state, "session state root");
    serve_cmd->add_option("--model", serve_model, "colorizer checkpoint");

    // toy-backend ------------------------------------------------------------
    auto* toy_cmd = app.add_subcommand(
        "toy-backend", "speak the subprocess backend protocol on stdin/stdout (reference implementation)");

    CLI11_PARSE(app, argc, argv);

    if (toy_cmd->parsed()) return run_toy_backend_stdio();

    if (imagine->parsed()) {
        const RgbImage input = load_image(imagine_input);
        PipelineParams params = imagine_backend.pipeline_params(imagine_input);
        params.n = imagine_n;
        if (!imagine_seeds.empty()) params.seeds = parse_seeds(imagine_seeds);

        const LabImage lab = rgb_to_lab(input);
        LabImage gray;
        gray.L = lab.L;
        gray.a = Plane::Zero(input.height(), input.width());
        gray.b = gray.a;

        const SegmentationMap seg = extract_context(gray, params.segmenter);
        const ReferenceSet refs = sample_references(seg, params.n, params.effective_seeds(), params.generator);

        fs::create_directories(imagine_out);
        save_label_png(fs::path(imagine_out) / "seg.png", seg.segment_ids);
        for (int i = 0; i < refs.count(); ++i)
            if (refs.ok[static_cast<size_t>(i)])
                save_png(fs::path(imagine_out) / ("ref_" + std::to_string(i) + ".png"),
                         refs.references[static_cast<size_t>(i)]);
        std::cout << "segments: " << seg.segments.size() << ", references: " << refs.ok_count() << "\n";

        if (!no_compose) {
            const Plane gray_lum = lab.L / 100.0f;
            const CompositionAssignment assignment = assign_segments(gray_lum, refs);
            const ComposedReference composed = assemble_reference(assignment, refs, gray_lum);
            save_png(fs::path(imagine_out) / "composed.png", composed.image);
            const std::string text = assignment_to_json(assignment).dump(2) + "\n";
            write_file(fs::path(imagine_out) / "assignment.json", Bytes(text.begin(), text.end()));
        }
        return 0;
    }

    if (colorize_cmd->parsed()) {
        const RgbImage input = load_image(col_input);
        const ColorizerModel model = model_or_default(col_model);
        RgbImage result;
        if (!col_ref.empty()) {
            result = colorize(input, load_image(col_ref), model);
        } else {
            PipelineParams params = col_backend.pipeline_params(col_input);
            params.n = col_n;
            if (!col_seeds.empty()) params.seeds = parse_seeds(col_seeds);
            result = run_pipeline(input, params, model).result;
        }
        save_png(col_out, result);
        std::cout << "wrote " << col_out << "\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        TrainConfig cfg;
        if (!train_config.empty()) cfg = load_train_config(train_config);
        for (const auto& kv : train_sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
            set_train_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        const auto corpus = load_corpus(train_corpus);
        std::cout << "training on " << corpus.size() << " images, " << cfg.steps << " steps\n";
        const TrainResult result = train(corpus, cfg, &std::cerr);
        if (!result.log.empty())
            std::cout << "final loss " << result.log.back().loss << " (step " << result.log.back().step << ")\n";
        if (cfg.out_dir.empty()) std::cout << "note: out_dir unset, model not saved\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        if (eval_diversity) {
            const auto images = load_corpus(eval_dirs.at(0));
            const DiversityReport rep = diversity_report(images, diversity_threshold);
            nlohmann::ordered_json j{{"mean_pairwise_chroma_l1", rep.mean_pairwise_chroma_l1},
                                     {"threshold", rep.threshold},
                                     {"diverse", rep.diverse},
                                     {"per_image_colorfulness", rep.per_image_colorfulness}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        std::vector<ColorfulnessReport> reports;
        for (const auto& dir : eval_dirs) reports.push_back(evaluate_directory(dir));
        for (const auto& rep : reports)
            std::cout << rep.method << ": mean colorfulness " << rep.mean << " over " << rep.count
                      << " images\n";
        if (!eval_out.empty()) write_report(eval_out, reports);
        else std::cout << report_to_json(reports);
        return 0;
    }

    if (pairs_cmd->parsed()) {
        const auto rows = make_pairing_sheet(pairs_a, pairs_b, pairs_seed);
        const std::string csv = pairing_sheet_csv(rows);
        write_file(pairs_out, Bytes(csv.begin(), csv.end()));
        std::cout << "wrote " << rows.size() << " pairs to " << pairs_out << "\n";
        return 0;
    }

    if (sim_cmd->parsed()) {
        const LabImage lab = rgb_to_lab(load_image(sim_image));
        const LabImage donor_lab = rgb_to_lab(load_image(sim_donor));
        Chroma truth;
        truth.a = lab.a;
        truth.b = lab.b;
        Chroma fake;
        fake.a = bilinear_resize(donor_lab.a, lab.height(), lab.width());
        fake.b = bilinear_resize(donor_lab.b, lab.height(), lab.width());
        const SimulationMask mask = sample_mask(lab.height(), lab.width(), sim_seed, {});
        const RgbImage r_prime = simulate_reference(lab.L, truth, fake, mask);
        fs::create_directories(sim_out);
        save_gray_png(fs::path(sim_out) / "mask.png", mask.mask);
        save_png(fs::path(sim_out) / "reference.png", r_prime);
        std::cout << "mask coverage " << mask.coverage() << ", wrote " << sim_out << "\n";
        return 0;
    }

    if (serve_cmd->parsed()) {
        auto model = std::make_shared<ColorizerModel>(model_or_default(serve_model));
        return serve(serve_state, model, serve_host, serve_port);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "icolor/imagination.hpp"

#include <csignal>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <thread>

#include "icolor/rng.hpp"

#include <nlohmann/json.hpp>

namespace icolor {

namespace {

// Base colors of the toy generator, one row per class modulo kToyPaletteRows,
// one entry per latent seed modulo kToyPaletteEntries. Mirrored in
// docs/backends.md; tests treat the documented table as the oracle.
constexpr float kToyPalette[kToyPaletteRows][kToyPaletteEntries][3] = {
    {{0.85f, 0.30f, 0.25f}, {0.95f, 0.60f, 0.20f}, {0.80f, 0.20f, 0.50f}, {0.70f, 0.15f, 0.15f}},
    {{0.25f, 0.55f, 0.85f}, {0.20f, 0.75f, 0.70f}, {0.35f, 0.40f, 0.85f}, {0.15f, 0.35f, 0.60f}},
    {{0.30f, 0.70f, 0.30f}, {0.60f, 0.80f, 0.30f}, {0.15f, 0.50f, 0.35f}, {0.75f, 0.85f, 0.45f}},
    {{0.90f, 0.80f, 0.30f}, {0.85f, 0.65f, 0.45f}, {0.95f, 0.85f, 0.60f}, {0.75f, 0.55f, 0.25f}},
    {{0.60f, 0.35f, 0.75f}, {0.85f, 0.50f, 0.75f}, {0.45f, 0.25f, 0.55f}, {0.95f, 0.70f, 0.80f}},
    {{0.55f, 0.65f, 0.75f}, {0.40f, 0.45f, 0.50f}, {0.75f, 0.70f, 0.65f}, {0.25f, 0.30f, 0.35f}},
};

float texture_noise(int y, int x, std::uint64_t seed, int width) {
    const std::uint64_t h = Rng::splitmix(Rng::combine(seed, static_cast<std::uint64_t>(y) * width + x));
    const float u = static_cast<float>((h >> 11) * 0x1.0p-53);
    return (u - 0.5f) * 2.0f * kToyTextureAmplitude;
}

int parse_int_option(const BackendDescriptor& desc, const std::string& key, int fallback) {
    const std::string v = desc.option(key);
    if (v.empty()) return fallback;
    return std::stoi(v);
}

// ---------------------------------------------------------------------------
// toy backends

class ToySegmenter final : public SegmenterBackend {
public:
    explicit ToySegmenter(int bands) : bands_(bands) {}

    SegmentationMap segment(const LabImage& gray) override {
        const int h = gray.height(), w = gray.width();
        LabelMap classes(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int band = static_cast<int>(gray.L(y, x) / 100.0f * bands_);
                classes(y, x) = std::clamp(band, 0, bands_ - 1);
            }
        SegmentationMap seg = segmentation_from_classes(classes);
        for (int k = 0; k < bands_; ++k) seg.class_names[k] = "tone" + std::to_string(k);
        return seg;
    }
    bool concurrent_safe() const override { return true; }

private:
    int bands_;
};

class ToyGenerator final : public GeneratorBackend {
public:
    RgbImage generate(const SegmentationMap& seg, const LatentCode& z) override { return toy_generate(seg, z); }
    bool concurrent_safe() const override { return true; }
};

// ---------------------------------------------------------------------------
// directory adapter: refs/<stem>/ref_<i>.png, seg/<stem>.png

class DirSegmenter final : public SegmenterBackend {
public:
    explicit DirSegmenter(const BackendDescriptor& desc)
        : root_(desc.option("root", ".")), stem_(desc.option("stem")) {
        if (stem_.empty()) throw BackendError("dir", "missing 'stem' option");
    }

    SegmentationMap segment(const LabImage& gray) override {
        const auto path = std::filesystem::path(root_) / "seg" / (stem_ + ".png");
        LabelMap classes;
        try {
            classes = load_label_png(path);
        } catch (const std::exception& e) {
            throw BackendError("dir", "cannot read segmentation " + path.string(), e.what());
        }
        if (classes.rows() != gray.height() || classes.cols() != gray.width())
            throw BackendError("dir", "segmentation shape mismatch for " + path.string());
        return segmentation_from_classes(classes);
    }
    bool concurrent_safe() const override { return true; }

private:
    std::string root_, stem_;
};

class DirGenerator final : public GeneratorBackend {
public:
    explicit DirGenerator(const BackendDescriptor& desc)
        : root_(desc.option("root", ".")), stem_(desc.option("stem")) {
        if (stem_.empty()) throw BackendError("dir", "missing 'stem' option");
    }

    // The latent seed selects the file index: refs/<stem>/ref_<seed>.png.
    RgbImage generate(const SegmentationMap& seg, const LatentCode& z) override {
        const auto path =
            std::filesystem::path(root_) / "refs" / stem_ / ("ref_" + std::to_string(z.seed) + ".png");
        RgbImage img;
        try {
            img = load_image(path);
        } catch (const std::exception& e) {
            throw BackendError("dir", "cannot read reference " + path.string(), e.what());
        }
        if (img.height() != seg.height || img.width() != seg.width)
            throw BackendError("dir", "reference shape mismatch for " + path.string());
        return img;
    }
    bool concurrent_safe() const override { return true; }

private:
    std::string root_, stem_;
};

// ---------------------------------------------------------------------------
// subprocess adapter: JSON header + PNG on stdin, PNG on stdout

struct SubprocessResult {
    int exit_code = -1;
    Bytes out;
    std::string err;
};

SubprocessResult run_subprocess(const std::string& command, const Bytes& input) {
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw BackendError("cmd", "pipe() failed", std::strerror(errno));

    const pid_t pid = fork();
    if (pid < 0) throw BackendError("cmd", "fork() failed", std::strerror(errno));
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);

    // Feed stdin from a helper thread so large payloads cannot deadlock
    // against a child that is already producing output. SIGPIPE is blocked
    // in the thread: a child that exits without reading must surface as an
    // EPIPE write error, not kill the process.
    std::thread writer([fd = in_pipe[1], &input] {
        sigset_t sigpipe;
        sigemptyset(&sigpipe);
        sigaddset(&sigpipe, SIGPIPE);
        pthread_sigmask(SIG_BLOCK, &sigpipe, nullptr);
        size_t off = 0;
        while (off < input.size()) {
            const ssize_t n = write(fd, input.data() + off, input.size() - off);
            if (n <= 0) break;
            off += static_cast<size_t>(n);
        }
        close(fd);
    });

    SubprocessResult res;
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    bool open_out = true, open_err = true;
    char buf[4096];
    while (open_out || open_err) {
        fds[0].fd = open_out ? out_pipe[0] : -1;
        fds[1].fd = open_err ? err_pipe[0] : -1;
        if (poll(fds, 2, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (open_out && (fds[0].revents & (POLLIN | POLLHUP))) {
            const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
            if (n <= 0) open_out = false;
            else res.out.insert(res.out.end(), buf, buf + n);
        }
        if (open_err && (fds[1].revents & (POLLIN | POLLHUP))) {
            const ssize_t n = read(err_pipe[0], buf, sizeof(buf));
            if (n <= 0) open_err = false;
            else res.err.append(buf, static_cast<size_t>(n));
        }
    }
    writer.join();
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

Bytes frame_request(int height, int width, const std::string& mode, std::uint64_t seed, const Bytes& png) {
    nlohmann::json header{{"height", height}, {"width", width}, {"mode", mode}, {"seed", seed}};
    const std::string line = header.dump() + "\n";
    Bytes out(line.begin(), line.end());
    out.insert(out.end(), png.begin(), png.end());
    return out;
}

std::string diag_tail(const std::string& err, size_t limit = 2000) {
    return err.size() <= limit ? err : err.substr(err.size() - limit);
}

class CmdSegmenter final : public SegmenterBackend {
public:
    explicit CmdSegmenter(const BackendDescriptor& desc)
        : command_(desc.option("command")), mode_(desc.option("mode", "gray")) {
        if (command_.empty()) throw BackendError("cmd", "missing 'command' option");
        if (mode_ != "gray" && mode_ != "rgb") throw BackendError("cmd", "mode must be 'gray' or 'rgb'");
    }

    SegmentationMap segment(const LabImage& gray) override {
        const int h = gray.height(), w = gray.width();
        Plane lum = gray.L / 100.0f;
        Bytes png;
        std::string mode;
        if (mode_ == "gray") {
            png = encode_gray_png(lum);
            mode = "segment-gray";
        } else {
            png = encode_png(replicate_gray(lum));
            mode = "segment-rgb";
        }
        const SubprocessResult res = run_subprocess(command_, frame_request(h, w, mode, 0, png));
        if (res.exit_code != 0)
            throw BackendError("cmd", "segmenter exited with code " + std::to_string(res.exit_code),
                               diag_tail(res.err));
        LabelMap classes;
        try {
            classes = decode_label_png(res.out);
        } catch (const std::exception& e) {
            throw BackendError("cmd", std::string("segmenter output is not a label PNG: ") + e.what(),
                               diag_tail(res.err));
        }
        if (classes.rows() != h || classes.cols() != w)
            throw BackendError("cmd", "segmenter output shape mismatch", diag_tail(res.err));
        return segmentation_from_classes(classes);
    }
    bool concurrent_safe() const override { return true; }

private:
    std::string command_, mode_;
};

class CmdGenerator final : public GeneratorBackend {
public:
    explicit CmdGenerator(const BackendDescriptor& desc) : command_(desc.option("command")) {
        if (command_.empty()) throw BackendError("cmd", "missing 'command' option");
    }

    RgbImage generate(const SegmentationMap& seg, const LatentCode& z) override {
        LabelMap classes = seg.class_labels.cwiseMax(0); // PNG labels are unsigned
        const Bytes png = encode_label_png(classes);
        const SubprocessResult res =
            run_subprocess(command_, frame_request(seg.height, seg.width, "generate", z.seed, png));
        if (res.exit_code != 0)
            throw BackendError("cmd", "generator exited with code " + std::to_string(res.exit_code),
                               diag_tail(res.err));
        RgbImage img;
        try {
            img = decode_image(res.out);
        } catch (const std::exception& e) {
            throw BackendError("cmd", std::string("generator output is not an image: ") + e.what(),
                               diag_tail(res.err));
        }
        if (img.height() != seg.height || img.width() != seg.width)
            throw BackendError("cmd", "generator output shape mismatch", diag_tail(res.err));
        return img;
    }
    bool concurrent_safe() const override { return true; }

private:
    std::string command_;
};

// ---------------------------------------------------------------------------
// registry

std::unique_ptr<SegmenterBackend> make_toy_segmenter(const BackendDescriptor& d) {
    return std::make_unique<ToySegmenter>(std::max(1, parse_int_option(d, "bands", 4)));
}
std::unique_ptr<GeneratorBackend> make_toy_generator(const BackendDescriptor&) {
    return std::make_unique<ToyGenerator>();
}
std::unique_ptr<SegmenterBackend> make_dir_segmenter(const BackendDescriptor& d) {
    return std::make_unique<DirSegmenter>(d);
}
std::unique_ptr<GeneratorBackend> make_dir_generator(const BackendDescriptor& d) {
    return std::make_unique<DirGenerator>(d);
}
std::unique_ptr<SegmenterBackend> make_cmd_segmenter(const BackendDescriptor& d) {
    return std::make_unique<CmdSegmenter>(d);
}
std::unique_ptr<GeneratorBackend> make_cmd_generator(const BackendDescriptor& d) {
    return std::make_unique<CmdGenerator>(d);
}

std::map<std::string, SegmenterFactory>& segmenter_registry() {
    static std::map<std::string, SegmenterFactory> reg{
        {"toy", &make_toy_segmenter}, {"dir", &make_dir_segmenter}, {"cmd", &make_cmd_segmenter}};
    return reg;
}

std::map<std::string, GeneratorFactory>& generator_registry() {
    static std::map<std::string, GeneratorFactory> reg{
        {"toy", &make_toy_generator}, {"dir", &make_dir_generator}, {"cmd", &make_cmd_generator}};
    return reg;
}

} // namespace

LatentCode make_latent(std::uint64_t seed, int dim) {
    LatentCode z;
    z.seed = seed;
    if (dim > 0) {
        Rng rng(Rng::combine(seed, 0x1a7e47));
        Eigen::VectorXf v(dim);
        for (int i = 0; i < dim; ++i) v[i] = static_cast<float>(rng.gaussian());
        z.vector = std::move(v);
    }
    return z;
}

void register_segmenter(const std::string& name, SegmenterFactory factory) {
    segmenter_registry()[name] = factory;
}
void register_generator(const std::string& name, GeneratorFactory factory) {
    generator_registry()[name] = factory;
}

std::unique_ptr<SegmenterBackend> make_segmenter(const BackendDescriptor& desc) {
    if (desc.kind != BackendDescriptor::Kind::segmenter)
        throw BackendError(desc.name, "descriptor is not a segmenter");
    auto it = segmenter_registry().find(desc.name);
    if (it == segmenter_registry().end()) throw BackendError(desc.name, "no such segmenter backend");
    return it->second(desc);
}

std::unique_ptr<GeneratorBackend> make_generator(const BackendDescriptor& desc) {
    if (desc.kind != BackendDescriptor::Kind::generator)
        throw BackendError(desc.name, "descriptor is not a generator");
    auto it = generator_registry().find(desc.name);
    if (it == generator_registry().end()) throw BackendError(desc.name, "no such generator backend");
    return it->second(desc);
}

SegmentationMap extract_context(const LabImage& gray, const BackendDescriptor& backend) {
    auto segmenter = make_segmenter(backend);
    SegmentationMap seg = segmenter->segment(gray);
    if (seg.segments.empty() || seg.height != gray.height() || seg.width != gray.width())
        throw DegenerateSegmentationError("extract_context: backend produced no usable segments");
    if (!is_partition(seg))
        throw DegenerateSegmentationError("extract_context: segment sets do not partition the image");
    return seg;
}

ReferenceSet sample_references(const SegmentationMap& seg, int n,
                               const std::vector<std::uint64_t>& seeds,
                               const BackendDescriptor& backend) {
    require(n >= 1, "sample_references: n must be >= 1");
    require(static_cast<int>(seeds.size()) == n, "sample_references: seeds length must equal n");

    auto generator = make_generator(backend);
    const int latent_dim = parse_int_option(backend, "latent_dim", 0);

    ReferenceSet set;
    set.segmentation = seg;
    std::string first_failure;
    for (int i = 0; i < n; ++i) {
        LatentCode z = make_latent(seeds[static_cast<size_t>(i)], latent_dim);
        set.latents.push_back(z);
        try {
            RgbImage ref = generator->generate(seg, z);
            if (ref.height() != seg.height || ref.width() != seg.width)
                throw BackendError(backend.name, "reference shape mismatch");
            set.references.push_back(std::move(ref));
            set.ok.push_back(true);
        } catch (const std::exception& e) {
            if (first_failure.empty()) first_failure = e.what();
            set.references.emplace_back(RgbImage(seg.height, seg.width));
            set.ok.push_back(false);
        }
    }
    if (set.ok_count() == 0)
        throw BackendError(backend.name, "all reference samples failed", first_failure);
    return set;
}

Eigen::Vector3f toy_palette_color(int class_id, std::uint64_t seed) {
    if (class_id < 0) return {0.5f, 0.5f, 0.5f};
    const auto& c = kToyPalette[class_id % kToyPaletteRows][seed % kToyPaletteEntries];
    return {c[0], c[1], c[2]};
}

int run_toy_backend_stdio() {
    try {
        Bytes input;
        char buf[4096];
        size_t n;
        while ((n = fread(buf, 1, sizeof(buf), stdin)) > 0) input.insert(input.end(), buf, buf + n);

        const auto newline = std::find(input.begin(), input.end(), static_cast<std::uint8_t>('\n'));
        if (newline == input.end()) throw std::runtime_error("missing header line");
        const nlohmann::json header = nlohmann::json::parse(std::string(input.begin(), newline));
        const Bytes payload(newline + 1, input.end());
        const std::string mode = header.at("mode").get<std::string>();
        const std::uint64_t seed = header.value("seed", 0ull);

        Bytes reply;
        if (mode == "segment-gray" || mode == "segment-rgb") {
            const RgbImage img = decode_image(payload);
            LabImage gray;
            gray.L = rgb_to_lab(img).L;
            gray.a = Plane::Zero(img.height(), img.width());
            gray.b = gray.a;
            BackendDescriptor desc{BackendDescriptor::Kind::segmenter, "toy", {}};
            const SegmentationMap seg = make_segmenter(desc)->segment(gray);
            reply = encode_label_png(seg.class_labels.cwiseMax(0));
        } else if (mode == "generate") {
            const LabelMap classes = decode_label_png(payload);
            const SegmentationMap seg = segmentation_from_classes(classes);
            reply = encode_png(toy_generate(seg, make_latent(seed)));
        } else {
            throw std::runtime_error("unknown mode: " + mode);
        }
        if (fwrite(reply.data(), 1, reply.size(), stdout) != reply.size())
            throw std::runtime_error("short write to stdout");
        fflush(stdout);
        return 0;
    } catch (const std::exception& e) {
        fprintf(stderr, "toy-backend: %s\n", e.what());
        return 1;
    }
}

RgbImage toy_generate(const SegmentationMap& seg, const LatentCode& z) {
    require(seg.height >= 1 && seg.width >= 1, "toy_generate: empty segmentation");
    RgbImage out(seg.height, seg.width);
    for (const auto& s : seg.segments) {
        const Eigen::Vector3f base = toy_palette_color(s.class_id, z.seed);
        for (int p : s.pixels) {
            const int y = p / seg.width, x = p % seg.width;
            const float noise = texture_noise(y, x, z.seed, seg.width);
            out.r(y, x) = std::clamp(base[0] + noise, 0.0f, 1.0f);
            out.g(y, x) = std::clamp(base[1] + noise, 0.0f, 1.0f);
            out.b(y, x) = std::clamp(base[2] + noise, 0.0f, 1.0f);
        }
    }
    return out;
}

} // namespace icolor

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icolor/colorspace.hpp"
#include "icolor/segmentation.hpp"

namespace icolor {

// Latent input to a generator backend; the vector (when requested) is a
// deterministic function of the seed.
struct LatentCode {
    std::uint64_t seed = 0;
    std::optional<Eigen::VectorXf> vector;
};

LatentCode make_latent(std::uint64_t seed, int dim = 0);

struct BackendDescriptor {
    enum class Kind { segmenter, generator };
    Kind kind = Kind::segmenter;
    std::string name;                            // "toy", "dir", "cmd", or registered
    std::map<std::string, std::string> options;  // adapter-specific settings

    std::string option(const std::string& key, const std::string& fallback = "") const {
        auto it = options.find(key);
        return it == options.end() ? fallback : it->second;
    }
};

// Raised when an adapter fails; diagnostics carries whatever the backend
// reported (stderr tail for subprocess adapters).
class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& backend, const std::string& message, std::string diagnostics = "")
        : std::runtime_error("backend '" + backend + "': " + message), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const { return diagnostics_; }

private:
    std::string diagnostics_;
};

class DegenerateSegmentationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SegmenterBackend {
public:
    virtual ~SegmenterBackend() = default;
    virtual SegmentationMap segment(const LabImage& gray) = 0;
    virtual bool concurrent_safe() const { return false; }
};

class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual RgbImage generate(const SegmentationMap& seg, const LatentCode& z) = 0;
    virtual bool concurrent_safe() const { return false; }
};

using SegmenterFactory = std::unique_ptr<SegmenterBackend> (*)(const BackendDescriptor&);
using GeneratorFactory = std::unique_ptr<GeneratorBackend> (*)(const BackendDescriptor&);

// In-process adapter registry. "toy", "dir" and "cmd" are pre-registered;
// embedders can add model-backed adapters under new names.
void register_segmenter(const std::string& name, SegmenterFactory factory);
void register_generator(const std::string& name, GeneratorFactory factory);
std::unique_ptr<SegmenterBackend> make_segmenter(const BackendDescriptor& desc);
std::unique_ptr<GeneratorBackend> make_generator(const BackendDescriptor& desc);

struct ReferenceSet {
    std::vector<RgbImage> references;
    std::vector<LatentCode> latents;
    std::vector<bool> ok; // per-sample success flag
    SegmentationMap segmentation;

    int count() const { return static_cast<int>(references.size()); }
    int ok_count() const {
        int n = 0;
        for (bool b : ok) n += b ? 1 : 0;
        return n;
    }
};

// Context extraction: run the segmenter backend on a grayscale image
// (LabImage with empty chroma; only L is consumed).
SegmentationMap extract_context(const LabImage& gray, const BackendDescriptor& backend);

// Draw n references, one per seed. Individual generator failures mark the
// sample failed; if every sample fails a BackendError is raised.
ReferenceSet sample_references(const SegmentationMap& seg, int n,
                               const std::vector<std::uint64_t>& seeds,
                               const BackendDescriptor& backend);

// Deterministic palette-based generator used by the toy backend: each
// segment is filled with the palette color for (class, seed) plus +-0.02
// texture noise. The palette is documented in docs/backends.md.
RgbImage toy_generate(const SegmentationMap& seg, const LatentCode& z);

// Palette entry for a class/seed pair (the toy generator's base color).
Eigen::Vector3f toy_palette_color(int class_id, std::uint64_t seed);

constexpr int kToyPaletteRows = 6;
constexpr int kToyPaletteEntries = 4;
constexpr float kToyTextureAmplitude = 0.02f;

// Reference implementation of the subprocess backend contract: reads the
// JSON header line plus a PNG from stdin, writes the reply PNG to stdout.
// Returns a process exit code.
int run_toy_backend_stdio();

} // namespace icolor

#pragma once

#include "icolor/colorizer.hpp"
#include "icolor/composition.hpp"

namespace icolor {

enum class PipelineStage { segmentation, generation, composition, warp, prediction, reconstruction, session, io };

const char* stage_name(PipelineStage stage);

// Stage-tagged failure, serialized by the service as {code, stage, message}.
class PipelineError : public std::runtime_error {
public:
    PipelineError(PipelineStage stage, std::string code, const std::string& message)
        : std::runtime_error(message), stage_(stage), code_(std::move(code)) {}
    PipelineStage stage() const { return stage_; }
    const std::string& code() const { return code_; }

private:
    PipelineStage stage_;
    std::string code_;
};

struct PipelineParams {
    BackendDescriptor segmenter{BackendDescriptor::Kind::segmenter, "toy", {}};
    BackendDescriptor generator{BackendDescriptor::Kind::generator, "toy", {}};
    int n = 6;
    std::vector<std::uint64_t> seeds; // empty -> 0..n-1

    std::vector<std::uint64_t> effective_seeds() const {
        if (!seeds.empty()) return seeds;
        std::vector<std::uint64_t> out(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = static_cast<std::uint64_t>(i);
        return out;
    }
};

struct PipelineResult {
    SegmentationMap segmentation;
    ReferenceSet references;
    CompositionAssignment assignment;
    ComposedReference composed;
    RgbImage result;
};

// Imagine -> compose -> colorize. Only the input's L channel is consumed, so
// color images work as well as grayscale ones. All intermediates returned.
PipelineResult run_pipeline(const RgbImage& input, const PipelineParams& params, const ColorizerModel& model);

} // namespace icolor

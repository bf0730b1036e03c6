#include "icolor/pipeline.hpp"

namespace icolor {

const char* stage_name(PipelineStage stage) {
    switch (stage) {
        case PipelineStage::segmentation: return "segmentation";
        case PipelineStage::generation: return "generation";
        case PipelineStage::composition: return "composition";
        case PipelineStage::warp: return "warp";
        case PipelineStage::prediction: return "prediction";
        case PipelineStage::reconstruction: return "reconstruction";
        case PipelineStage::session: return "session";
        case PipelineStage::io: return "io";
    }
    return "unknown";
}

namespace {

template <class F>
auto run_stage(PipelineStage stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PipelineError&) {
        throw;
    } catch (const BackendError& e) {
        throw PipelineError(stage, "backend_error", e.what());
    } catch (const std::invalid_argument& e) {
        throw PipelineError(stage, "bad_request", e.what());
    } catch (const std::exception& e) {
        throw PipelineError(stage, "internal", e.what());
    }
}

} // namespace

PipelineResult run_pipeline(const RgbImage& input, const PipelineParams& params, const ColorizerModel& model) {
    const LabImage lab = run_stage(PipelineStage::io, [&] { return rgb_to_lab(input); });
    LabImage gray;
    gray.L = lab.L;
    gray.a = Plane::Zero(input.height(), input.width());
    gray.b = gray.a;

    PipelineResult out;
    out.segmentation =
        run_stage(PipelineStage::segmentation, [&] { return extract_context(gray, params.segmenter); });

    const auto seeds = params.effective_seeds();
    out.references = run_stage(PipelineStage::generation, [&] {
        return sample_references(out.segmentation, params.n, seeds, params.generator);
    });

    const Plane gray_lum = lab.L / 100.0f;
    out.assignment =
        run_stage(PipelineStage::composition, [&] { return assign_segments(gray_lum, out.references); });
    out.composed = run_stage(PipelineStage::composition,
                             [&] { return assemble_reference(out.assignment, out.references, gray_lum); });

    const WarpConfig wcfg{model.config.warp_temperature, 4096};
    const WarpedReference warped = run_stage(
        PipelineStage::warp, [&] { return warp_reference(gray_lum, out.composed.image, *model.extractor, wcfg); });

    const Chroma ab =
        run_stage(PipelineStage::prediction, [&] { return predict_chroma(lab.L, warped, model); });

    out.result = run_stage(PipelineStage::reconstruction, [&] {
        LabImage full;
        full.L = lab.L;
        full.a = ab.a;
        full.b = ab.b;
        return lab_to_rgb(full).image;
    });
    return out;
}

} // namespace icolor

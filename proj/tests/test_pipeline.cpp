#include <doctest.h>

#include "icolor/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace icolor;

namespace {

ColorizerModel small_model(std::uint64_t seed = 1) {
    ColorizerConfig cfg;
    cfg.unet.base = 4;
    cfg.unet.levels = 2;
    cfg.extractor.widths = {8, 16, 16, 16, 16};
    return ColorizerModel(cfg, seed);
}

bool images_identical(const RgbImage& a, const RgbImage& b) {
    return (a.r == b.r).all() && (a.g == b.g).all() && (a.b == b.b).all();
}

} // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("toy backends with a fresh model reproduce the grayscale input") {
    const ColorizerModel model = small_model();
    const RgbImage img = fixtures::natural_image(1, 32, 32);
    const RgbImage gray = replicate_gray(luminance_of(img));

    PipelineParams params;
    params.n = 3;
    const PipelineResult out = run_pipeline(gray, params, model);

    // zero-chroma prediction reconstructs the input lightness
    const LabImage in_lab = rgb_to_lab(gray);
    const LabImage out_lab = rgb_to_lab(out.result);
    CHECK((out_lab.L - in_lab.L).abs().maxCoeff() < 0.1f);
    CHECK(out_lab.a.abs().maxCoeff() < 0.1f);
    CHECK(out_lab.b.abs().maxCoeff() < 0.1f);
}

TEST_CASE("pipeline is deterministic for fixed seeds") {
    const ColorizerModel model = small_model();
    const RgbImage img = fixtures::natural_image(2, 32, 32);
    PipelineParams params;
    params.n = 4;
    params.seeds = {3, 5, 7, 11};
    const PipelineResult a = run_pipeline(img, params, model);
    const PipelineResult b = run_pipeline(img, params, model);
    CHECK(images_identical(a.result, b.result));
    CHECK(a.assignment.beta == b.assignment.beta);
}

TEST_CASE("intermediates satisfy the pipeline invariants") {
    const ColorizerModel model = small_model();
    const RgbImage img = fixtures::natural_image(3, 48, 48);
    PipelineParams params;
    params.n = 4;
    const PipelineResult out = run_pipeline(img, params, model);

    // partition
    CHECK(is_partition(out.segmentation));

    // beta optimality certificate
    for (const auto& [j, best] : out.assignment.beta) {
        REQUIRE(best != kExcluded);
        const auto& row = out.assignment.scores.at(j);
        for (double s : row) CHECK(row[best] <= s);
    }

    // composed reference copies pixels from the chosen candidates
    for (const auto& seg : out.segmentation.segments) {
        const int idx = out.assignment.beta.at(seg.id);
        const int p = seg.pixels[seg.pixels.size() / 2];
        const int y = p / out.segmentation.width, x = p % out.segmentation.width;
        CHECK(out.composed.provenance(y, x) == idx);
        CHECK(out.composed.image.r(y, x) == out.references.references[idx].r(y, x));
    }

    // luminance pass-through before clipping
    const LabImage in_lab = rgb_to_lab(img);
    const LabImage out_lab = rgb_to_lab(out.result);
    int off = 0;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            if (std::abs(out_lab.L(y, x) - in_lab.L(y, x)) > 0.1f) ++off;
    CHECK(off <= 48 * 48 * 2 / 100);
}

TEST_CASE("predict_chroma pads and crops sizes not divisible by the factor") {
    const ColorizerModel model = small_model();
    const RgbImage img = fixtures::natural_image(5, 50, 70); // 50, 70 not divisible by 4
    const LabImage lab = rgb_to_lab(img);
    const WarpedReference warped =
        warp_reference(Plane(lab.L / 100.0f), img, *model.extractor, {model.config.warp_temperature, 4096});
    const Chroma ab = predict_chroma(lab.L, warped, model);
    CHECK(ab.a.rows() == 50);
    CHECK(ab.a.cols() == 70);
    CHECK((ab.a >= -128.0f).all());
    CHECK((ab.a <= 127.0f).all());
}

TEST_CASE("colorize output keeps the input lightness and is deterministic") {
    ColorizerModel model = small_model();
    // non-zero but moderate chroma predictions, so clipping stays rare and
    // the pre-clipping lightness pass-through is observable
    model.net.final_conv().init_he(3);
    model.net.final_conv().weight *= 0.02f;
    const RgbImage img = fixtures::natural_image(6, 32, 32);
    const RgbImage ref = fixtures::natural_image(7, 32, 32);

    const RgbImage out = colorize(img, ref, model);
    const LabImage in_lab = rgb_to_lab(img);
    const LabImage out_lab = rgb_to_lab(out);
    int off = 0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (std::abs(out_lab.L(y, x) - in_lab.L(y, x)) > 0.1f) ++off;
    CHECK(off <= 32 * 32 * 2 / 100);

    const RgbImage again = colorize(img, ref, model);
    CHECK(images_identical(out, again));

    // achromatic reference and zeroed model reproduce the grayscale input
    const ColorizerModel zero = small_model();
    const RgbImage gray = replicate_gray(luminance_of(img));
    const RgbImage null_out = colorize(gray, replicate_gray(luminance_of(img)), zero);
    const LabImage null_lab = rgb_to_lab(null_out);
    CHECK(null_lab.a.abs().maxCoeff() < 0.1f);
    CHECK((null_lab.L - rgb_to_lab(gray).L).abs().maxCoeff() < 0.1f);
}

TEST_CASE("stage errors carry the failing stage") {
    const ColorizerModel model = small_model();
    const RgbImage img = fixtures::natural_image(4, 32, 32);

    PipelineParams bad_segmenter;
    bad_segmenter.segmenter.name = "missing";
    try {
        run_pipeline(img, bad_segmenter, model);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage() == PipelineStage::segmentation);
        CHECK(e.code() == "backend_error");
    }

    PipelineParams bad_generator;
    bad_generator.generator = {BackendDescriptor::Kind::generator, "cmd", {{"command", "false"}}};
    bad_generator.n = 2;
    try {
        run_pipeline(img, bad_generator, model);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage() == PipelineStage::generation);
    }

    PipelineParams bad_seeds;
    bad_seeds.n = 3;
    bad_seeds.seeds = {1};
    try {
        run_pipeline(img, bad_seeds, model);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage() == PipelineStage::generation);
        CHECK(e.code() == "bad_request");
    }
}

TEST_SUITE_END();

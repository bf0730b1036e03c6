#include <doctest.h>

#include <filesystem>
#include <set>

#include "icolor/imageio.hpp"
#include "icolor/imagination.hpp"
#include "icolor/rng.hpp"
#include "support/fixtures.hpp"

using namespace icolor;

namespace {

LabImage gray_of(const RgbImage& img) {
    LabImage lab = rgb_to_lab(img);
    lab.a.setZero();
    lab.b.setZero();
    return lab;
}

LabImage uniform_gray(float value, int h, int w) {
    RgbImage img(h, w);
    img.r.setConstant(value);
    img.g.setConstant(value);
    img.b.setConstant(value);
    return gray_of(img);
}

BackendDescriptor toy_segmenter() { return {BackendDescriptor::Kind::segmenter, "toy", {}}; }
BackendDescriptor toy_generator() { return {BackendDescriptor::Kind::generator, "toy", {}}; }

bool images_identical(const RgbImage& a, const RgbImage& b) {
    return (a.r == b.r).all() && (a.g == b.g).all() && (a.b == b.b).all();
}

// Documented palette from docs/backends.md, duplicated here as the oracle.
constexpr float kDocPalette[6][4][3] = {
    {{0.85f, 0.30f, 0.25f}, {0.95f, 0.60f, 0.20f}, {0.80f, 0.20f, 0.50f}, {0.70f, 0.15f, 0.15f}},
    {{0.25f, 0.55f, 0.85f}, {0.20f, 0.75f, 0.70f}, {0.35f, 0.40f, 0.85f}, {0.15f, 0.35f, 0.60f}},
    {{0.30f, 0.70f, 0.30f}, {0.60f, 0.80f, 0.30f}, {0.15f, 0.50f, 0.35f}, {0.75f, 0.85f, 0.45f}},
    {{0.90f, 0.80f, 0.30f}, {0.85f, 0.65f, 0.45f}, {0.95f, 0.85f, 0.60f}, {0.75f, 0.55f, 0.25f}},
    {{0.60f, 0.35f, 0.75f}, {0.85f, 0.50f, 0.75f}, {0.45f, 0.25f, 0.55f}, {0.95f, 0.70f, 0.80f}},
    {{0.55f, 0.65f, 0.75f}, {0.40f, 0.45f, 0.50f}, {0.75f, 0.70f, 0.65f}, {0.25f, 0.30f, 0.35f}},
};

} // namespace

TEST_SUITE_BEGIN("imagination");

TEST_CASE("uniform mid-gray yields a single segment covering the image") {
    const LabImage gray = uniform_gray(0.5f, 12, 10);
    const SegmentationMap seg = extract_context(gray, toy_segmenter());
    CHECK(seg.segments.size() == 1);
    CHECK(seg.segments[0].pixels.size() == 120);
    CHECK(is_partition(seg));
}

TEST_CASE("two-tone image splits into exactly the two halves") {
    RgbImage img(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const float v = x < 4 ? 0.2f : 0.85f;
            img.r(y, x) = img.g(y, x) = img.b(y, x) = v;
        }
    const SegmentationMap seg = extract_context(gray_of(img), toy_segmenter());
    REQUIRE(seg.segments.size() == 2);

    // oracle: direct thresholding of the input
    for (const auto& s : seg.segments) {
        std::set<int> xs;
        for (int p : s.pixels) xs.insert(p % 8);
        const bool left = xs.count(0) > 0;
        CHECK(s.pixels.size() == 32);
        for (int x : xs) CHECK((x < 4) == left);
    }
}

TEST_CASE("labels always form a partition") {
    for (std::uint64_t seed : {10ull, 11ull, 12ull, 13ull}) {
        const RgbImage img = fixtures::natural_image(seed, 24, 31);
        const SegmentationMap seg = extract_context(gray_of(img), toy_segmenter());
        CHECK(is_partition(seg));
        size_t total = 0;
        for (const auto& s : seg.segments) total += s.pixels.size();
        CHECK(total == 24u * 31u);
    }
}

TEST_CASE("toy generator fills segments with the documented palette color") {
    const LabImage gray = uniform_gray(0.5f, 6, 6);
    const SegmentationMap seg = extract_context(gray, toy_segmenter());
    const int cls = seg.segments[0].class_id;
    for (std::uint64_t s : {0ull, 1ull, 5ull}) {
        const RgbImage ref = toy_generate(seg, make_latent(s));
        const auto* expect = kDocPalette[cls % 6][s % 4];
        CHECK((ref.r - expect[0]).abs().maxCoeff() <= kToyTextureAmplitude + 1e-6f);
        CHECK((ref.g - expect[1]).abs().maxCoeff() <= kToyTextureAmplitude + 1e-6f);
        CHECK((ref.b - expect[2]).abs().maxCoeff() <= kToyTextureAmplitude + 1e-6f);
    }
}

TEST_CASE("toy generator is bit deterministic") {
    const RgbImage img = fixtures::natural_image(21, 16, 16);
    const SegmentationMap seg = extract_context(gray_of(img), toy_segmenter());
    const RgbImage a = toy_generate(seg, make_latent(42));
    const RgbImage b = toy_generate(seg, make_latent(42));
    CHECK(images_identical(a, b));
}

TEST_CASE("two segments of the same class share a palette color") {
    // two disconnected dark squares on a bright background
    RgbImage img(10, 10);
    img.r.setConstant(0.9f);
    img.g.setConstant(0.9f);
    img.b.setConstant(0.9f);
    for (int y = 1; y <= 2; ++y)
        for (int x : {1, 2, 7, 8}) {
            img.r(y, x) = img.g(y, x) = img.b(y, x) = 0.1f;
        }
    const SegmentationMap seg = extract_context(gray_of(img), toy_segmenter());
    std::vector<const Segment*> dark;
    for (const auto& s : seg.segments)
        if (s.pixels.size() == 4) dark.push_back(&s);
    REQUIRE(dark.size() == 2);
    CHECK(dark[0]->class_id == dark[1]->class_id);

    const RgbImage ref = toy_generate(seg, make_latent(3));
    const int y0 = dark[0]->pixels[0] / 10, x0 = dark[0]->pixels[0] % 10;
    const int y1 = dark[1]->pixels[0] / 10, x1 = dark[1]->pixels[0] % 10;
    CHECK(std::abs(ref.r(y0, x0) - ref.r(y1, x1)) <= 2 * kToyTextureAmplitude + 1e-6f);
    CHECK(std::abs(ref.g(y0, x0) - ref.g(y1, x1)) <= 2 * kToyTextureAmplitude + 1e-6f);
}

TEST_CASE("sample_references is deterministic and seed-sensitive") {
    const LabImage gray = uniform_gray(0.5f, 8, 8);
    const SegmentationMap seg = extract_context(gray, toy_segmenter());

    const ReferenceSet a = sample_references(seg, 2, {7, 7}, toy_generator());
    CHECK(images_identical(a.references[0], a.references[1])); // identical seeds

    const ReferenceSet b = sample_references(seg, 2, {0, 1}, toy_generator());
    CHECK_FALSE(images_identical(b.references[0], b.references[1]));

    // n=1 with seed s picks palette entry (s mod 4)
    const ReferenceSet c = sample_references(seg, 1, {6}, toy_generator());
    const int cls = seg.segments[0].class_id;
    const auto* expect = kDocPalette[cls % 6][6 % 4];
    CHECK((c.references[0].r - expect[0]).abs().maxCoeff() <= kToyTextureAmplitude + 1e-6f);
}

TEST_CASE("distinct consecutive seeds hit at least two palette entries") {
    const RgbImage img = fixtures::natural_image(31, 16, 16);
    const SegmentationMap seg = extract_context(gray_of(img), toy_segmenter());
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3};
    const ReferenceSet refs = sample_references(seg, 4, seeds, toy_generator());
    for (const auto& s : seg.segments) {
        const int y = s.pixels[0] / seg.width, x = s.pixels[0] % seg.width;
        std::set<int> colors;
        for (const auto& ref : refs.references)
            colors.insert(static_cast<int>(std::lround(ref.r(y, x) * 50)) * 2500 +
                          static_cast<int>(std::lround(ref.g(y, x) * 50)));
        CHECK(colors.size() >= 2);
    }
}

TEST_CASE("latent vectors are functions of the seed") {
    const LatentCode a = make_latent(5, 16);
    const LatentCode b = make_latent(5, 16);
    const LatentCode c = make_latent(6, 16);
    REQUIRE(a.vector.has_value());
    CHECK(a.vector->isApprox(*b.vector));
    CHECK_FALSE(a.vector->isApprox(*c.vector));
    CHECK_FALSE(make_latent(5).vector.has_value());
}

TEST_CASE("seeds length must equal n") {
    const LabImage gray = uniform_gray(0.5f, 4, 4);
    const SegmentationMap seg = extract_context(gray, toy_segmenter());
    CHECK_THROWS_AS(sample_references(seg, 3, {1, 2}, toy_generator()), std::invalid_argument);
}

TEST_CASE("directory adapter reads segmentation and references") {
    const auto root = std::filesystem::temp_directory_path() / "icolor_dir_backend";
    std::filesystem::create_directories(root / "seg");
    std::filesystem::create_directories(root / "refs" / "photo");

    LabelMap classes(6, 6);
    classes.setConstant(2);
    classes.topRows(3).setConstant(9);
    save_label_png(root / "seg" / "photo.png", classes);

    const RgbImage ref0 = fixtures::natural_image(1, 6, 6);
    const RgbImage ref1 = fixtures::natural_image(2, 6, 6);
    save_png(root / "refs" / "photo" / "ref_0.png", ref0);
    save_png(root / "refs" / "photo" / "ref_1.png", ref1);

    BackendDescriptor seg_desc{BackendDescriptor::Kind::segmenter, "dir",
                               {{"root", root.string()}, {"stem", "photo"}}};
    const LabImage gray = uniform_gray(0.5f, 6, 6);
    const SegmentationMap seg = extract_context(gray, seg_desc);
    CHECK(seg.segments.size() == 2);
    CHECK(seg.class_of(1) == 9);
    CHECK(seg.class_of(2) == 2);

    BackendDescriptor gen_desc{BackendDescriptor::Kind::generator, "dir",
                               {{"root", root.string()}, {"stem", "photo"}}};
    const ReferenceSet refs = sample_references(seg, 2, {0, 1}, gen_desc);
    CHECK(refs.ok_count() == 2);
    // 8-bit quantization through the PNG writer
    CHECK((refs.references[0].r - ref0.r).abs().maxCoeff() < 0.003f);
    CHECK((refs.references[1].g - ref1.g).abs().maxCoeff() < 0.003f);
}

TEST_CASE("directory adapter failures are per-sample") {
    const auto root = std::filesystem::temp_directory_path() / "icolor_dir_backend2";
    std::filesystem::create_directories(root / "refs" / "x");
    save_png(root / "refs" / "x" / "ref_0.png", fixtures::natural_image(3, 5, 5));

    LabelMap classes = LabelMap::Constant(5, 5, 1);
    const SegmentationMap seg = segmentation_from_classes(classes);
    BackendDescriptor gen{BackendDescriptor::Kind::generator, "dir", {{"root", root.string()}, {"stem", "x"}}};

    const ReferenceSet refs = sample_references(seg, 2, {0, 5}, gen); // ref_5 missing
    CHECK(refs.ok[0]);
    CHECK_FALSE(refs.ok[1]);
    CHECK(refs.ok_count() == 1);

    CHECK_THROWS_AS(sample_references(seg, 1, {9}, gen), BackendError); // all failed
}

TEST_CASE("subprocess adapter round trip against the reference backend") {
    const char* bin = TOY_BACKEND_BIN;
    const RgbImage img = fixtures::natural_image(77, 16, 16);
    const LabImage gray = gray_of(img);

    BackendDescriptor seg_desc{BackendDescriptor::Kind::segmenter, "cmd", {{"command", bin}}};
    const SegmentationMap via_cmd = extract_context(gray, seg_desc);
    CHECK(is_partition(via_cmd));

    // the in-process toy segmenter on the 8-bit roundtripped gray agrees
    const RgbImage quant = decode_image(encode_png(replicate_gray(gray.L / 100.0f)));
    const SegmentationMap direct = extract_context(gray_of(quant), toy_segmenter());
    CHECK(via_cmd.segments.size() == direct.segments.size());
    CHECK((via_cmd.class_labels == direct.class_labels).all());

    BackendDescriptor gen_desc{BackendDescriptor::Kind::generator, "cmd", {{"command", bin}}};
    const ReferenceSet refs = sample_references(via_cmd, 2, {0, 1}, gen_desc);
    CHECK(refs.ok_count() == 2);

    // palette colors survive the PNG hop (8-bit quantization only)
    const RgbImage direct_ref = toy_generate(via_cmd, make_latent(0));
    CHECK((refs.references[0].r - direct_ref.r).abs().maxCoeff() < 0.003f);
}

TEST_CASE("subprocess segmenter modes gray and rgb agree") {
    const RgbImage img = fixtures::natural_image(78, 12, 12);
    const LabImage gray = gray_of(img);
    BackendDescriptor g{BackendDescriptor::Kind::segmenter, "cmd", {{"command", TOY_BACKEND_BIN}, {"mode", "gray"}}};
    BackendDescriptor r{BackendDescriptor::Kind::segmenter, "cmd", {{"command", TOY_BACKEND_BIN}, {"mode", "rgb"}}};
    const SegmentationMap sg = extract_context(gray, g);
    const SegmentationMap sr = extract_context(gray, r);
    CHECK((sg.class_labels == sr.class_labels).all());
}

TEST_CASE("subprocess failures carry diagnostics") {
    const LabImage gray = uniform_gray(0.4f, 4, 4);
    BackendDescriptor fail{BackendDescriptor::Kind::segmenter, "cmd",
                           {{"command", "sh -c 'echo boom >&2; exit 3'"}}};
    try {
        extract_context(gray, fail);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("code 3") != std::string::npos);
        CHECK(e.diagnostics().find("boom") != std::string::npos);
    }

    BackendDescriptor garbage{BackendDescriptor::Kind::segmenter, "cmd", {{"command", "echo not-a-png"}}};
    CHECK_THROWS_AS(extract_context(gray, garbage), BackendError);
}

TEST_CASE("unknown backend names are rejected") {
    BackendDescriptor desc{BackendDescriptor::Kind::segmenter, "nope", {}};
    CHECK_THROWS_AS(make_segmenter(desc), BackendError);
}

namespace {
std::unique_ptr<SegmenterBackend> make_degenerate(const BackendDescriptor&) {
    class Degenerate final : public SegmenterBackend {
    public:
        SegmentationMap segment(const LabImage&) override { return {}; }
    };
    return std::make_unique<Degenerate>();
}
} // namespace

TEST_CASE("registered backends can be extended; empty output is degenerate") {
    register_segmenter("degenerate", &make_degenerate);
    BackendDescriptor desc{BackendDescriptor::Kind::segmenter, "degenerate", {}};
    CHECK_THROWS_AS(extract_context(uniform_gray(0.5f, 4, 4), desc), DegenerateSegmentationError);
}

TEST_SUITE_END();

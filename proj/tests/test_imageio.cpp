#include <doctest.h>

#include <filesystem>

#include "icolor/imageio.hpp"
#include "support/fixtures.hpp"

using namespace icolor;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "icolor_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

Plane quantize8(const Plane& p) {
    return ((p.min(1.0f).max(0.0f) * 255.0f).round() / 255.0f);
}

} // namespace

TEST_SUITE_BEGIN("imageio");

TEST_CASE("png round trip preserves 8-bit values exactly") {
    const RgbImage img = fixtures::random_rgb(5, 9, 14);
    const RgbImage back = decode_image(encode_png(img));
    CHECK((back.r - quantize8(img.r)).abs().maxCoeff() < 1e-6f);
    CHECK((back.g - quantize8(img.g)).abs().maxCoeff() < 1e-6f);
    CHECK((back.b - quantize8(img.b)).abs().maxCoeff() < 1e-6f);
}

TEST_CASE("gray png round trip") {
    Plane p(4, 5);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) p(y, x) = (y * 5 + x) / 19.0f;
    const auto dir = temp_dir();
    save_gray_png(dir / "g.png", p);
    const Plane back = load_gray_png(dir / "g.png");
    CHECK((back - quantize8(p)).abs().maxCoeff() < 1e-6f);
}

TEST_CASE("16-bit label png keeps ids above 255") {
    LabelMap labels(3, 3);
    labels << 0, 1, 255, 256, 300, 1000, 40000, 65535, 7;
    const LabelMap back = decode_label_png(encode_label_png(labels));
    CHECK((back == labels).all());
}

TEST_CASE("label decode rejects rgb png") {
    const RgbImage img = fixtures::random_rgb(2, 4, 4);
    CHECK_THROWS_AS(decode_label_png(encode_png(img)), std::runtime_error);
}

TEST_CASE("jpeg round trip is close") {
    const RgbImage img = fixtures::natural_image(11, 32, 32);
    const RgbImage back = decode_image(encode_jpeg(img, 95));
    const float err = ((back.r - img.r).abs() + (back.g - img.g).abs() + (back.b - img.b).abs()).mean();
    CHECK(err < 0.05f);
}

TEST_CASE("format detection by magic bytes") {
    const RgbImage img = fixtures::random_rgb(3, 4, 4);
    CHECK(looks_like_png(encode_png(img)));
    CHECK(looks_like_jpeg(encode_jpeg(img)));
    CHECK_FALSE(looks_like_png(encode_jpeg(img)));
}

TEST_CASE("garbage bytes are rejected") {
    Bytes junk{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(decode_image(junk), std::runtime_error);
    Bytes truncated = encode_png(fixtures::random_rgb(4, 8, 8));
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(decode_image(truncated), std::runtime_error);
}

TEST_CASE("missing file raises") {
    CHECK_THROWS_AS(load_image("/nonexistent/file.png"), std::runtime_error);
}

TEST_SUITE_END();

#pragma once

#include <cstdint>
#include <vector>

#include "icolor/colorspace.hpp"

namespace fixtures {

// Deterministic photo-like test image: smooth low-frequency lightness with
// soft chroma blobs, in gamut except for rare edge pixels. Built directly in
// Lab so luminance/chroma statistics are controlled.
icolor::RgbImage natural_image(std::uint64_t seed, int h, int w);

std::vector<icolor::RgbImage> natural_corpus(std::uint64_t seed, int count, int h, int w);

// Uniformly random RGB pixels (valid but unnatural), for property tests.
icolor::RgbImage random_rgb(std::uint64_t seed, int h, int w);

} // namespace fixtures

#pragma once

#include "icolor/colorspace.hpp"
#include "icolor/nn/features.hpp"
#include "icolor/simulation.hpp"

namespace icolor {

struct WarpedReference {
    Chroma warped_chroma; // ab units, aligned to the input geometry
    Plane confidence;     // max correspondence weight per pixel, in [0,1]
};

struct WarpConfig {
    float temperature = 0.01f; // softmax temperature over cosine similarity
    int row_block = 4096;      // correspondence rows processed per block
};

// Dense correspondence between deep features of the grayscale input and the
// grayscale of the reference at 1/4 resolution; reference chroma is
// aggregated along softmax-weighted correspondences and upsampled.
// lum01 is the input's [0,1] lightness.
WarpedReference warp_reference(const Plane& lum01, const RgbImage& reference,
                               const nn::FeatureExtractor& extractor, const WarpConfig& cfg = {});

} // namespace icolor

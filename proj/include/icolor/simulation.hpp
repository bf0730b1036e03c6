#pragma once

#include <cstdint>
#include <vector>

#include "icolor/colorspace.hpp"

namespace icolor {

// ab chroma pair.
struct Chroma {
    Plane a, b;

    Chroma() = default;
    Chroma(int height, int width) : a(Plane::Zero(height, width)), b(Plane::Zero(height, width)) {}
};

struct MaskConfig {
    double min_coverage = 0.1;
    double max_coverage = 0.6;
    int min_regions = 1;
    int max_regions = 4;
    double blob_probability = 0.5;
};

struct RegionSpec {
    enum class Kind { rectangle, blob };
    Kind kind = Kind::rectangle;
    double cy = 0, cx = 0;   // center, pixel coordinates
    double ry = 0, rx = 0;   // half extents
    double lobes = 0, phase = 0, wobble = 0; // blob perturbation
    double area_fraction = 0;
};

struct SimulationMask {
    Plane mask; // 0/1 values
    std::vector<RegionSpec> regions;

    double coverage() const {
        return mask.size() == 0 ? 0.0 : static_cast<double>(mask.sum()) / static_cast<double>(mask.size());
    }
};

// Union of 1..max_regions rectangles and blobs, rescaled about their centers
// until the covered fraction lands inside [min_coverage, max_coverage].
// Deterministic per seed. min>=1 forces an all-one mask, max<=0 all-zero.
SimulationMask sample_mask(int h, int w, std::uint64_t seed, const MaskConfig& cfg = {});

// Eq-style chroma splice: Y' = Y (1-M) + Y_fake M, reconstructed to RGB with
// the original lightness. X is L in [0,100].
RgbImage simulate_reference(const Plane& X, const Chroma& Y, const Chroma& Y_fake, const SimulationMask& M);

struct TrainingSample {
    Plane X;          // lightness, [0,100]
    Chroma Y;         // ground-truth chroma
    RgbImage R_prime; // simulated reference
    SimulationMask M;
    int source_index = -1;
    int donor_index = -1; // Y_fake provenance
};

// One sample per pool image; the chroma donor is always a different image,
// resized bilinearly to the target shape. Deterministic per seed.
std::vector<TrainingSample> make_training_batch(const std::vector<RgbImage>& images, std::uint64_t seed,
                                                const MaskConfig& cfg = {});

} // namespace icolor

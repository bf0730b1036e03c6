#pragma once

#include <filesystem>
#include <memory>

#include "icolor/nn/features.hpp"
#include "icolor/nn/unet.hpp"
#include "icolor/warp.hpp"

namespace icolor {

struct ColorizerConfig {
    nn::UNetConfig unet;
    nn::FeatureExtractorConfig extractor;
    float warp_temperature = 0.01f;
};

// Input normalization pinned for checkpoints: L/100 shifted to [-1,1],
// ab/110, confidence as-is; the network output is ab/110.
constexpr float kAbScale = 110.0f;

struct ColorizerModel {
    ColorizerConfig config;
    std::uint64_t training_seed = 0;
    nn::UNet net;
    std::shared_ptr<nn::FeatureExtractor> extractor;

    explicit ColorizerModel(const ColorizerConfig& cfg = {}, std::uint64_t init_seed = 0)
        : config(cfg), training_seed(init_seed), net(cfg.unet, init_seed),
          extractor(std::make_shared<nn::FeatureExtractor>(cfg.extractor)) {}
};

// 4-channel network input from lightness (L units) and a warped reference.
nn::Tensor colorizer_input(const Plane& lightness, const WarpedReference& warped);

// Predict ab chroma; sides not divisible by the network factor are
// reflect-padded and cropped back. Output clamped to the valid ab range.
Chroma predict_chroma(const Plane& lightness, const WarpedReference& warped, const ColorizerModel& model);

// Warp + predict against an already-composed reference.
RgbImage colorize_with_reference(const Plane& lightness, const RgbImage& reference,
                                 const ColorizerModel& model);

// Full single-reference colorization of a grayscale (or color: only L is
// used) image.
RgbImage colorize(const RgbImage& input, const RgbImage& reference, const ColorizerModel& model);

void save_checkpoint(const std::filesystem::path& path, const ColorizerModel& model);
ColorizerModel load_checkpoint(const std::filesystem::path& path);

} // namespace icolor

#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "icolor/nn/features.hpp"

namespace icolor {

// Layered feature loss over RGB reconstructions: weighted sum of per-layer
// mean absolute feature differences at the five conv*_2 taps.
struct PerceptualLossSpec {
    std::array<std::string, 5> layers{"conv1_2", "conv2_2", "conv3_2", "conv4_2", "conv5_2"};
    std::array<double, 5> weights{0.2, 0.2, 0.2, 0.2, 0.2};
    std::shared_ptr<const nn::FeatureExtractor> extractor;

    void validate() const {
        for (size_t i = 0; i < layers.size(); ++i) {
            require(layers[i] == nn::kFeatureTapNames[i], "perceptual loss: unexpected layer set");
            require(weights[i] > 0.0, "perceptual loss: weights must be positive");
        }
        require(extractor != nullptr, "perceptual loss: missing feature extractor");
    }
};

// Templated core so the gradient can be validated in double precision.
// Returns the loss; when dpred is non-null it receives d(loss)/d(pred).
template <class S>
S perceptual_loss_t(const nn::TensorT<S>& pred, const nn::TensorT<S>& gt,
                    const nn::FeatureExtractorT<S>& extractor, const std::array<S, 5>& weights,
                    nn::TensorT<S>* dpred = nullptr) {
    require(pred.same_shape(gt), "perceptual_loss: shape mismatch");

    typename nn::FeatureExtractorT<S>::Cache cache;
    const auto pred_feats = extractor.forward(pred, 5, dpred ? &cache : nullptr);
    const auto gt_feats = extractor.forward(gt, 5);

    S loss = S(0);
    std::array<nn::TensorT<S>, 5> dtaps;
    for (int l = 0; l < 5; ++l) {
        const auto& fp = pred_feats.taps[static_cast<size_t>(l)];
        const auto& fg = gt_feats.taps[static_cast<size_t>(l)];
        const S numel = static_cast<S>(fp.size());
        loss += weights[static_cast<size_t>(l)] * (fp.data - fg.data).abs().sum() / numel;
        if (dpred) {
            nn::TensorT<S> d(fp.ch, fp.h, fp.w);
            d.data = (fp.data - fg.data).sign() * (weights[static_cast<size_t>(l)] / numel);
            dtaps[static_cast<size_t>(l)] = std::move(d);
        }
    }
    if (dpred) *dpred = extractor.backward_input(cache, dtaps);
    return loss;
}

// Batch mean over [0,1] RGB images.
double perceptual_loss(const std::vector<RgbImage>& pred, const std::vector<RgbImage>& gt,
                       const PerceptualLossSpec& spec);

} // namespace icolor

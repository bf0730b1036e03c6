#include "icolor/loss.hpp"

namespace icolor {

double perceptual_loss(const std::vector<RgbImage>& pred, const std::vector<RgbImage>& gt,
                       const PerceptualLossSpec& spec) {
    spec.validate();
    require(!pred.empty() && pred.size() == gt.size(), "perceptual_loss: batch sizes differ");

    std::array<float, 5> weights;
    for (size_t i = 0; i < weights.size(); ++i) weights[i] = static_cast<float>(spec.weights[i]);

    double total = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        require(pred[i].same_shape(gt[i]), "perceptual_loss: image shapes differ");
        require(valid_unit_range(pred[i]) && valid_unit_range(gt[i]),
                "perceptual_loss: images must be in [0,1]");
        total += perceptual_loss_t<float>(nn::tensor_from_rgb<float>(pred[i]),
                                          nn::tensor_from_rgb<float>(gt[i]), *spec.extractor, weights);
    }
    return total / static_cast<double>(pred.size());
}

} // namespace icolor

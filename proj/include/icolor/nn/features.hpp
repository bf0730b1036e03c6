#pragma once

#include <array>
#include <memory>
#include <string>

#include "icolor/nn/layers.hpp"

namespace icolor::nn {

// Five-stage VGG-style feature chain truncated at the conv*_2 taps:
//   conv1_1 conv1_2 | pool | conv2_1 conv2_2 | pool | ... | conv5_1 conv5_2
// Weights are deterministic seeded He-normal draws unless replaced via
// load_weights; the extractor is fixed (never trained) and serves both the
// perceptual loss and the warp correspondence features.
struct FeatureExtractorConfig {
    std::array<int, 5> widths{16, 32, 64, 96, 96};
    std::uint64_t seed = 0x0fea;

    std::string id() const {
        std::string s = "vggt";
        for (int w : widths) s += "-" + std::to_string(w);
        return s + "-s" + std::to_string(seed);
    }
};

inline constexpr std::array<const char*, 5> kFeatureTapNames{"conv1_2", "conv2_2", "conv3_2", "conv4_2",
                                                             "conv5_2"};
inline constexpr std::array<float, 3> kInputMean{0.485f, 0.456f, 0.406f};
inline constexpr std::array<float, 3> kInputStd{0.229f, 0.224f, 0.225f};

template <class S>
struct FeatureStages {
    std::array<TensorT<S>, 5> taps; // post-ReLU activation of each conv*_2
};

template <class S>
class FeatureExtractorT {
public:
    explicit FeatureExtractorT(const FeatureExtractorConfig& cfg = {}) : cfg_(cfg) {
        int in = 3;
        for (int stage = 0; stage < 5; ++stage) {
            const int width = cfg.widths[static_cast<size_t>(stage)];
            convs_[2 * stage] = Conv2d<S>(in, width);
            convs_[2 * stage].init_he(Rng::combine(cfg.seed, 2 * stage));
            convs_[2 * stage + 1] = Conv2d<S>(width, width);
            convs_[2 * stage + 1].init_he(Rng::combine(cfg.seed, 2 * stage + 1));
            in = width;
        }
    }

    const FeatureExtractorConfig& config() const { return cfg_; }

    struct Cache {
        std::array<TensorT<S>, 10> conv_in;   // input of each conv
        std::array<TensorT<S>, 10> conv_out;  // pre-ReLU output of each conv
        std::array<std::vector<int>, 4> pool_argmax;
        std::array<std::pair<int, int>, 4> pool_in_hw;
        std::array<bool, 4> pool_skipped{};
        int stages = 5;
    };

    TensorT<S> normalize(const TensorT<S>& rgb) const {
        require(rgb.ch == 3, "feature extractor expects an RGB tensor");
        TensorT<S> x = rgb;
        for (int c = 0; c < 3; ++c)
            x.plane(c) = (x.plane(c) - S(kInputMean[static_cast<size_t>(c)])) / S(kInputStd[static_cast<size_t>(c)]);
        return x;
    }

    // stages in [1,5]: how many taps to produce (warp needs only 3).
    FeatureStages<S> forward(const TensorT<S>& rgb, int stages = 5, Cache* cache = nullptr) const {
        require(stages >= 1 && stages <= 5, "feature extractor: stages out of range");
        FeatureStages<S> out;
        if (cache) cache->stages = stages;
        TensorT<S> cur = normalize(rgb);
        for (int stage = 0; stage < stages; ++stage) {
            const Conv2d<S>& ca = convs_[2 * stage];
            const Conv2d<S>& cb = convs_[2 * stage + 1];
            TensorT<S> a = ca.forward(cur);
            TensorT<S> ra = relu(a);
            TensorT<S> b = cb.forward(ra);
            TensorT<S> rb = relu(b);
            if (cache) {
                cache->conv_in[2 * stage] = std::move(cur);
                cache->conv_out[2 * stage] = std::move(a);
                cache->conv_in[2 * stage + 1] = std::move(ra);
                cache->conv_out[2 * stage + 1] = b;
            }
            out.taps[static_cast<size_t>(stage)] = rb;
            if (stage + 1 < stages) {
                if (rb.h < 2 || rb.w < 2) {
                    // too small to pool; keep resolution
                    if (cache) cache->pool_skipped[static_cast<size_t>(stage)] = true;
                    cur = std::move(rb);
                } else {
                    std::vector<int> argmax;
                    cur = maxpool2(rb, cache ? &argmax : nullptr);
                    if (cache) {
                        cache->pool_argmax[static_cast<size_t>(stage)] = std::move(argmax);
                        cache->pool_in_hw[static_cast<size_t>(stage)] = {rb.h, rb.w};
                    }
                }
            }
        }
        return out;
    }

    // Gradient with respect to the raw RGB input given per-tap gradients.
    // Extractor weights are fixed, so only data gradients are propagated.
    TensorT<S> backward_input(const Cache& cache, const std::array<TensorT<S>, 5>& dtaps) const {
        const int stages = cache.stages;
        TensorT<S> dcur; // gradient at the post-ReLU tap of the current stage
        for (int stage = stages - 1; stage >= 0; --stage) {
            const size_t st = static_cast<size_t>(stage);
            TensorT<S> dtap = dtaps[st];
            if (dcur.size() > 0) {
                // gradient arriving from the next stage through the pool
                TensorT<S> dpool;
                if (cache.pool_skipped[st]) dpool = dcur;
                else
                    dpool = maxpool2_backward(cache.pool_argmax[st], dcur, cache.pool_in_hw[st].first,
                                              cache.pool_in_hw[st].second);
                if (dtap.size() == 0) dtap = std::move(dpool);
                else dtap.data += dpool.data;
            }
            if (dtap.size() == 0) dtap = TensorT<S>(convs_[2 * stage + 1].out_ch,
                                                    cache.conv_out[2 * stage + 1].h,
                                                    cache.conv_out[2 * stage + 1].w);

            TensorT<S> db = relu_backward(cache.conv_out[2 * stage + 1], dtap);
            TensorT<S> dra = backward_data(convs_[2 * stage + 1], cache.conv_in[2 * stage + 1], db);
            TensorT<S> da = relu_backward(cache.conv_out[2 * stage], dra);
            dcur = backward_data(convs_[2 * stage], cache.conv_in[2 * stage], da);
        }
        // chain through the input normalization
        for (int c = 0; c < 3; ++c) dcur.plane(c) /= S(kInputStd[static_cast<size_t>(c)]);
        return dcur;
    }

    std::array<Conv2d<S>, 10>& convs() { return convs_; }
    const std::array<Conv2d<S>, 10>& convs() const { return convs_; }

private:
    // data-only conv backward (weights fixed)
    static TensorT<S> backward_data(const Conv2d<S>& conv, const TensorT<S>& x, const TensorT<S>& dy) {
        MatX<S> dpatches(x.plane_size(), static_cast<long>(conv.in_ch) * conv.k * conv.k);
        dpatches.noalias() = dy.as_positions() * conv.weight.transpose();

        TensorT<S> dx(conv.in_ch, x.h, x.w);
        const int pad = conv.k / 2;
        const long hw = x.plane_size();
        for (int c = 0; c < conv.in_ch; ++c)
            for (int dy2 = 0; dy2 < conv.k; ++dy2)
                for (int dx2 = 0; dx2 < conv.k; ++dx2) {
                    const long col = (static_cast<long>(c) * conv.k + dy2) * conv.k + dx2;
                    const S* src = dpatches.data() + col * hw;
                    for (int y = 0; y < x.h; ++y) {
                        const int sy = y + dy2 - pad;
                        if (sy < 0 || sy >= x.h) continue;
                        S* dst = dx.data.data() + (static_cast<long>(c) * x.h + sy) * x.w;
                        for (int xx = 0; xx < x.w; ++xx) {
                            const int sx = xx + dx2 - pad;
                            if (sx >= 0 && sx < x.w) dst[sx] += src[static_cast<long>(y) * x.w + xx];
                        }
                    }
                }
        return dx;
    }

    FeatureExtractorConfig cfg_;
    std::array<Conv2d<S>, 10> convs_;
};

using FeatureExtractor = FeatureExtractorT<float>;

} // namespace icolor::nn

#pragma once

#include <vector>

#include "icolor/nn/layers.hpp"

namespace icolor::nn {

struct UNetConfig {
    int in_ch = 4;   // normalized L, warped ab, confidence
    int out_ch = 2;  // normalized ab
    int base = 16;
    int levels = 4;

    int downscale_factor() const { return 1 << levels; }
    int width_at(int level) const { return base << level; }
};

// conv -> IN -> ReLU -> conv -> IN -> ReLU
template <class S>
struct ConvBlock {
    Conv2d<S> c1, c2;
    InstanceNorm<S> n1, n2;

    ConvBlock() = default;
    ConvBlock(int in, int out) : c1(in, out), c2(out, out), n1(out), n2(out) {}

    void init(std::uint64_t seed) {
        c1.init_he(Rng::combine(seed, 1));
        c2.init_he(Rng::combine(seed, 2));
    }

    struct Cache {
        TensorT<S> x, n1_out, r1, n2_out;
        typename InstanceNorm<S>::Cache in1, in2;
    };

    TensorT<S> forward(const TensorT<S>& x, Cache* cache) const {
        TensorT<S> a1 = c1.forward(x);
        typename InstanceNorm<S>::Cache in1;
        TensorT<S> f1 = n1.forward(a1, cache ? &in1 : nullptr);
        TensorT<S> r1 = relu(f1);
        TensorT<S> a2 = c2.forward(r1);
        typename InstanceNorm<S>::Cache in2;
        TensorT<S> f2 = n2.forward(a2, cache ? &in2 : nullptr);
        TensorT<S> y = relu(f2);
        if (cache) {
            cache->x = x;
            cache->n1_out = std::move(f1);
            cache->r1 = std::move(r1);
            cache->n2_out = std::move(f2);
            cache->in1 = std::move(in1);
            cache->in2 = std::move(in2);
        }
        return y;
    }

    TensorT<S> backward(const Cache& cache, const TensorT<S>& dy) {
        TensorT<S> dn2 = relu_backward(cache.n2_out, dy);
        TensorT<S> da2 = n2.backward(cache.in2, dn2);
        TensorT<S> dr1 = c2.backward(cache.r1, da2);
        TensorT<S> dn1 = relu_backward(cache.n1_out, dr1);
        TensorT<S> da1 = n1.backward(cache.in1, dn1);
        return c1.backward(cache.x, da1);
    }

    void collect(std::vector<ParamView<S>>& out, const std::string& prefix) {
        c1.collect(out, prefix + ".c1");
        n1.collect(out, prefix + ".n1");
        c2.collect(out, prefix + ".c2");
        n2.collect(out, prefix + ".n2");
    }
    void zero_grad() {
        c1.zero_grad();
        c2.zero_grad();
        n1.zero_grad();
        n2.zero_grad();
    }
};

// Encoder-decoder with skip connections; fully convolutional, so any input
// whose sides are divisible by 2^levels works. The final conv is linear and
// zero-initialized: a fresh model predicts zero chroma.
template <class S>
class UNetT {
public:
    explicit UNetT(const UNetConfig& cfg = {}, std::uint64_t seed = 0) : cfg_(cfg) {
        int in = cfg.in_ch;
        for (int l = 0; l < cfg.levels; ++l) {
            enc_.emplace_back(in, cfg.width_at(l));
            in = cfg.width_at(l);
        }
        bottleneck_ = ConvBlock<S>(in, cfg.base << cfg.levels);
        int deep = cfg.base << cfg.levels;
        for (int l = cfg.levels - 1; l >= 0; --l) {
            dec_.emplace_back(deep + cfg.width_at(l), cfg.width_at(l));
            deep = cfg.width_at(l);
        }
        final_ = Conv2d<S>(cfg.base, cfg.out_ch);
        init(seed);
    }

    void init(std::uint64_t seed) {
        for (size_t i = 0; i < enc_.size(); ++i) enc_[i].init(Rng::combine(seed, 10 + i));
        bottleneck_.init(Rng::combine(seed, 50));
        for (size_t i = 0; i < dec_.size(); ++i) dec_[i].init(Rng::combine(seed, 100 + i));
        final_.weight.setZero();
        final_.bias.setZero();
    }

    const UNetConfig& config() const { return cfg_; }

    struct Cache {
        std::vector<typename ConvBlock<S>::Cache> enc;
        typename ConvBlock<S>::Cache bottleneck;
        std::vector<typename ConvBlock<S>::Cache> dec;
        std::vector<TensorT<S>> skips;
        std::vector<std::vector<int>> pool_argmax;
        std::vector<std::pair<int, int>> pool_in_hw;
        std::vector<TensorT<S>> dec_in; // concat inputs of decoder blocks
        TensorT<S> final_in;
    };

    TensorT<S> forward(const TensorT<S>& x, Cache* cache = nullptr) const {
        require(x.ch == cfg_.in_ch, "unet: wrong input channel count");
        require(x.h % cfg_.downscale_factor() == 0 && x.w % cfg_.downscale_factor() == 0,
                "unet: input sides must be divisible by the downsampling factor");
        if (cache) {
            cache->enc.resize(enc_.size());
            cache->dec.resize(dec_.size());
            cache->skips.resize(enc_.size());
            cache->pool_argmax.resize(enc_.size());
            cache->pool_in_hw.resize(enc_.size());
            cache->dec_in.resize(dec_.size());
        }
        TensorT<S> cur = x;
        std::vector<TensorT<S>> skips(enc_.size());
        for (size_t l = 0; l < enc_.size(); ++l) {
            TensorT<S> y = enc_[l].forward(cur, cache ? &cache->enc[l] : nullptr);
            skips[l] = y;
            if (cache) {
                cache->pool_in_hw[l] = {y.h, y.w};
                cur = maxpool2(y, &cache->pool_argmax[l]);
            } else {
                cur = maxpool2(y);
            }
        }
        cur = bottleneck_.forward(cur, cache ? &cache->bottleneck : nullptr);
        for (size_t d = 0; d < dec_.size(); ++d) {
            const size_t l = enc_.size() - 1 - d; // matching encoder level
            TensorT<S> up = upsample2_nearest(cur);
            TensorT<S> cat = concat_channels(up, skips[l]);
            if (cache) cache->dec_in[d] = cat;
            cur = dec_[d].forward(cat, cache ? &cache->dec[d] : nullptr);
        }
        if (cache) {
            cache->skips = std::move(skips);
            cache->final_in = cur;
        }
        return final_.forward(cur);
    }

    // Returns d(loss)/d(input); parameter gradients accumulate in the layers.
    TensorT<S> backward(const Cache& cache, const TensorT<S>& dy) {
        TensorT<S> dcur = final_.backward(cache.final_in, dy);
        std::vector<TensorT<S>> dskips(enc_.size());
        for (size_t d = dec_.size(); d-- > 0;) {
            const size_t l = enc_.size() - 1 - d;
            TensorT<S> dcat = dec_[d].backward(cache.dec[d], dcur);
            TensorT<S> dup(dcat.ch - cache.skips[l].ch, dcat.h, dcat.w);
            TensorT<S> dskip(cache.skips[l].ch, dcat.h, dcat.w);
            split_channels(dcat, dup, dskip);
            dskips[l] = std::move(dskip);
            dcur = upsample2_nearest_backward(dup);
        }
        dcur = bottleneck_.backward(cache.bottleneck, dcur);
        for (size_t l = enc_.size(); l-- > 0;) {
            TensorT<S> dpool =
                maxpool2_backward(cache.pool_argmax[l], dcur, cache.pool_in_hw[l].first, cache.pool_in_hw[l].second);
            dpool.data += dskips[l].data;
            dcur = enc_[l].backward(cache.enc[l], dpool);
        }
        return dcur;
    }

    void collect(std::vector<ParamView<S>>& out) {
        for (size_t l = 0; l < enc_.size(); ++l) enc_[l].collect(out, "enc" + std::to_string(l));
        bottleneck_.collect(out, "bottleneck");
        for (size_t d = 0; d < dec_.size(); ++d) dec_[d].collect(out, "dec" + std::to_string(d));
        final_.collect(out, "final");
    }
    void zero_grad() {
        for (auto& b : enc_) b.zero_grad();
        bottleneck_.zero_grad();
        for (auto& b : dec_) b.zero_grad();
        final_.zero_grad();
    }

    Conv2d<S>& final_conv() { return final_; }

private:
    UNetConfig cfg_;
    std::vector<ConvBlock<S>> enc_;
    ConvBlock<S> bottleneck_;
    std::vector<ConvBlock<S>> dec_;
    Conv2d<S> final_;
};

using UNet = UNetT<float>;

} // namespace icolor::nn

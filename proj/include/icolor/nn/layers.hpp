#pragma once

#include <string>
#include <vector>

#include "icolor/nn/tensor.hpp"
#include "icolor/rng.hpp"

namespace icolor::nn {

// Flat view of one learnable array, shared by the optimizer and the
// checkpoint writer. Gradients mirror the same layout.
template <class S>
struct ParamView {
    std::string name;
    S* value = nullptr;
    S* grad = nullptr;
    long size = 0;
};

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// 3x3 (or kxk) same-padding convolution, stride 1, via im2col GEMM.
template <class S>
struct Conv2d {
    int in_ch = 0, out_ch = 0, k = 3;
    MatX<S> weight; // (in_ch*k*k) x out_ch
    VecX<S> bias;   // out_ch
    MatX<S> dweight;
    VecX<S> dbias;

    Conv2d() = default;
    Conv2d(int in, int out, int ksize = 3) : in_ch(in), out_ch(out), k(ksize) {
        weight = MatX<S>::Zero(in * k * k, out);
        bias = VecX<S>::Zero(out);
        dweight = MatX<S>::Zero(in * k * k, out);
        dbias = VecX<S>::Zero(out);
    }

    void init_he(std::uint64_t seed) {
        Rng rng(seed);
        const double std_dev = std::sqrt(2.0 / (in_ch * k * k));
        for (long i = 0; i < weight.size(); ++i) weight.data()[i] = static_cast<S>(rng.gaussian() * std_dev);
        bias.setZero();
    }

    void im2col(const TensorT<S>& x, MatX<S>& patches) const {
        const int pad = k / 2;
        const long hw = x.plane_size();
        patches.resize(hw, static_cast<long>(in_ch) * k * k);
        for (int c = 0; c < in_ch; ++c) {
            for (int dy = 0; dy < k; ++dy) {
                for (int dx = 0; dx < k; ++dx) {
                    const long col = (static_cast<long>(c) * k + dy) * k + dx;
                    S* dst = patches.data() + col * hw;
                    for (int y = 0; y < x.h; ++y) {
                        const int sy = y + dy - pad;
                        if (sy < 0 || sy >= x.h) {
                            std::fill(dst + static_cast<long>(y) * x.w, dst + static_cast<long>(y + 1) * x.w, S(0));
                            continue;
                        }
                        const S* src = x.data.data() + (static_cast<long>(c) * x.h + sy) * x.w;
                        for (int xx = 0; xx < x.w; ++xx) {
                            const int sx = xx + dx - pad;
                            dst[static_cast<long>(y) * x.w + xx] = (sx < 0 || sx >= x.w) ? S(0) : src[sx];
                        }
                    }
                }
            }
        }
    }

    TensorT<S> forward(const TensorT<S>& x) const {
        TensorT<S> y(out_ch, x.h, x.w);
        MatX<S> patches;
        im2col(x, patches);
        y.as_positions().noalias() = patches * weight;
        y.as_positions().rowwise() += bias.transpose();
        return y;
    }

    // Accumulates dweight/dbias, returns dx. Patches are recomputed from the
    // stored input instead of cached (memory over speed).
    TensorT<S> backward(const TensorT<S>& x, const TensorT<S>& dy) {
        MatX<S> patches;
        im2col(x, patches);
        dweight.noalias() += patches.transpose() * dy.as_positions();
        dbias.noalias() += dy.as_positions().colwise().sum().transpose();

        MatX<S> dpatches(patches.rows(), patches.cols());
        dpatches.noalias() = dy.as_positions() * weight.transpose();

        // col2im scatter-add
        TensorT<S> dx(in_ch, x.h, x.w);
        const int pad = k / 2;
        const long hw = x.plane_size();
        for (int c = 0; c < in_ch; ++c) {
            for (int dy2 = 0; dy2 < k; ++dy2) {
                for (int dx2 = 0; dx2 < k; ++dx2) {
                    const long col = (static_cast<long>(c) * k + dy2) * k + dx2;
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
            }
        }
        return dx;
    }

    void collect(std::vector<ParamView<S>>& out, const std::string& prefix) {
        out.push_back({prefix + ".weight", weight.data(), dweight.data(), weight.size()});
        out.push_back({prefix + ".bias", bias.data(), dbias.data(), bias.size()});
    }
    void zero_grad() {
        dweight.setZero();
        dbias.setZero();
    }
};

// ---------------------------------------------------------------------------
// Per-channel instance normalization with affine parameters.
template <class S>
struct InstanceNorm {
    VecX<S> gamma, beta;
    VecX<S> dgamma, dbeta;
    S eps = S(1e-5);

    InstanceNorm() = default;
    explicit InstanceNorm(int channels) {
        gamma = VecX<S>::Ones(channels);
        beta = VecX<S>::Zero(channels);
        dgamma = VecX<S>::Zero(channels);
        dbeta = VecX<S>::Zero(channels);
    }

    struct Cache {
        TensorT<S> xhat;
        VecX<S> inv_std;
    };

    TensorT<S> forward(const TensorT<S>& x, Cache* cache = nullptr) const {
        TensorT<S> y(x.ch, x.h, x.w);
        VecX<S> inv_std(x.ch);
        TensorT<S> xhat(x.ch, x.h, x.w);
        const S n = static_cast<S>(x.plane_size());
        for (int c = 0; c < x.ch; ++c) {
            const auto p = x.plane(c);
            const S mean = p.mean();
            const S var = (p - mean).square().sum() / n;
            const S is = S(1) / std::sqrt(var + eps);
            inv_std[c] = is;
            xhat.plane(c) = (p - mean) * is;
            y.plane(c) = xhat.plane(c) * gamma[c] + beta[c];
        }
        if (cache) {
            cache->xhat = std::move(xhat);
            cache->inv_std = std::move(inv_std);
        }
        return y;
    }

    TensorT<S> backward(const Cache& cache, const TensorT<S>& dy) {
        TensorT<S> dx(dy.ch, dy.h, dy.w);
        const S n = static_cast<S>(dy.plane_size());
        for (int c = 0; c < dy.ch; ++c) {
            const auto xhat = cache.xhat.plane(c);
            const auto g = dy.plane(c);
            dgamma[c] += (g * xhat).sum();
            dbeta[c] += g.sum();
            const S sum_g = g.sum();
            const S sum_gx = (g * xhat).sum();
            dx.plane(c) = (gamma[c] * cache.inv_std[c] / n) * (n * g - sum_g - xhat * sum_gx);
        }
        return dx;
    }

    void collect(std::vector<ParamView<S>>& out, const std::string& prefix) {
        out.push_back({prefix + ".gamma", gamma.data(), dgamma.data(), gamma.size()});
        out.push_back({prefix + ".beta", beta.data(), dbeta.data(), beta.size()});
    }
    void zero_grad() {
        dgamma.setZero();
        dbeta.setZero();
    }
};

// ---------------------------------------------------------------------------
// elementwise / structural ops as free functions

template <class S>
TensorT<S> relu(const TensorT<S>& x) {
    TensorT<S> y = x;
    y.data = y.data.max(S(0));
    return y;
}

template <class S>
TensorT<S> relu_backward(const TensorT<S>& x, const TensorT<S>& dy) {
    TensorT<S> dx = dy;
    dx.data = (x.data > S(0)).select(dy.data, S(0));
    return dx;
}

// 2x2 max pooling (even input sizes), argmax cached for the backward pass.
template <class S>
TensorT<S> maxpool2(const TensorT<S>& x, std::vector<int>* argmax = nullptr) {
    const int oh = x.h / 2, ow = x.w / 2;
    TensorT<S> y(x.ch, oh, ow);
    if (argmax) argmax->assign(static_cast<size_t>(x.ch) * oh * ow, 0);
    for (int c = 0; c < x.ch; ++c) {
        for (int yy = 0; yy < oh; ++yy) {
            for (int xx = 0; xx < ow; ++xx) {
                S best = x.at(c, 2 * yy, 2 * xx);
                int best_idx = (2 * yy) * x.w + 2 * xx;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const S v = x.at(c, 2 * yy + dy, 2 * xx + dx);
                        if (v > best) {
                            best = v;
                            best_idx = (2 * yy + dy) * x.w + 2 * xx + dx;
                        }
                    }
                y.at(c, yy, xx) = best;
                if (argmax) (*argmax)[(static_cast<size_t>(c) * oh + yy) * ow + xx] = best_idx;
            }
        }
    }
    return y;
}

template <class S>
TensorT<S> maxpool2_backward(const std::vector<int>& argmax, const TensorT<S>& dy, int in_h, int in_w) {
    TensorT<S> dx(dy.ch, in_h, in_w);
    for (int c = 0; c < dy.ch; ++c)
        for (int yy = 0; yy < dy.h; ++yy)
            for (int xx = 0; xx < dy.w; ++xx) {
                const int idx = argmax[(static_cast<size_t>(c) * dy.h + yy) * dy.w + xx];
                dx.data[static_cast<long>(c) * in_h * in_w + idx] += dy.at(c, yy, xx);
            }
    return dx;
}

template <class S>
TensorT<S> avgpool2(const TensorT<S>& x) {
    const int oh = x.h / 2, ow = x.w / 2;
    TensorT<S> y(x.ch, oh, ow);
    for (int c = 0; c < x.ch; ++c)
        for (int yy = 0; yy < oh; ++yy)
            for (int xx = 0; xx < ow; ++xx)
                y.at(c, yy, xx) = S(0.25) * (x.at(c, 2 * yy, 2 * xx) + x.at(c, 2 * yy, 2 * xx + 1) +
                                             x.at(c, 2 * yy + 1, 2 * xx) + x.at(c, 2 * yy + 1, 2 * xx + 1));
    return y;
}

template <class S>
TensorT<S> upsample2_nearest(const TensorT<S>& x) {
    TensorT<S> y(x.ch, x.h * 2, x.w * 2);
    for (int c = 0; c < x.ch; ++c)
        for (int yy = 0; yy < y.h; ++yy)
            for (int xx = 0; xx < y.w; ++xx) y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
    return y;
}

template <class S>
TensorT<S> upsample2_nearest_backward(const TensorT<S>& dy) {
    TensorT<S> dx(dy.ch, dy.h / 2, dy.w / 2);
    for (int c = 0; c < dy.ch; ++c)
        for (int yy = 0; yy < dy.h; ++yy)
            for (int xx = 0; xx < dy.w; ++xx) dx.at(c, yy / 2, xx / 2) += dy.at(c, yy, xx);
    return dx;
}

template <class S>
TensorT<S> concat_channels(const TensorT<S>& a, const TensorT<S>& b) {
    require(a.h == b.h && a.w == b.w, "concat_channels: spatial shapes differ");
    TensorT<S> y(a.ch + b.ch, a.h, a.w);
    y.data.head(a.size()) = a.data;
    y.data.tail(b.size()) = b.data;
    return y;
}

template <class S>
void split_channels(const TensorT<S>& dy, TensorT<S>& da, TensorT<S>& db) {
    da.data = dy.data.head(da.size());
    db.data = dy.data.tail(db.size());
}

} // namespace icolor::nn

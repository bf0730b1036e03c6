#pragma once

#include <Eigen/Dense>

#include "icolor/image.hpp"

namespace icolor::nn {

// CHW tensor: channel-major planes, row-major pixels within a plane. The
// flattened plane of channel c is exactly column c of the position-major
// GEMM layouts used by the conv layers.
template <class S>
struct TensorT {
    int ch = 0, h = 0, w = 0;
    Eigen::Array<S, Eigen::Dynamic, 1> data;

    TensorT() = default;
    TensorT(int ch_, int h_, int w_) : ch(ch_), h(h_), w(w_) {
        data = Eigen::Array<S, Eigen::Dynamic, 1>::Zero(static_cast<long>(ch_) * h_ * w_);
    }

    long plane_size() const { return static_cast<long>(h) * w; }
    long size() const { return data.size(); }
    bool same_shape(const TensorT& o) const { return ch == o.ch && h == o.h && w == o.w; }

    S& at(int c, int y, int x) { return data[(static_cast<long>(c) * h + y) * w + x]; }
    S at(int c, int y, int x) const { return data[(static_cast<long>(c) * h + y) * w + x]; }

    Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>> plane(int c) {
        return {data.data() + static_cast<long>(c) * plane_size(), plane_size()};
    }
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> plane(int c) const {
        return {data.data() + static_cast<long>(c) * plane_size(), plane_size()};
    }

    // positions x channels view (column c = plane c)
    Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> as_positions() {
        return {data.data(), plane_size(), ch};
    }
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> as_positions() const {
        return {data.data(), plane_size(), ch};
    }

    static TensorT from_plane(const PlaneT<float>& p) {
        TensorT t(1, static_cast<int>(p.rows()), static_cast<int>(p.cols()));
        for (int y = 0; y < t.h; ++y)
            for (int x = 0; x < t.w; ++x) t.at(0, y, x) = static_cast<S>(p(y, x));
        return t;
    }

    PlaneT<float> to_plane(int c) const {
        PlaneT<float> p(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) p(y, x) = static_cast<float>(at(c, y, x));
        return p;
    }
};

using Tensor = TensorT<float>;

template <class S>
TensorT<S> tensor_from_rgb(const RgbImage& img) {
    TensorT<S> t(3, img.height(), img.width());
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) {
            t.at(0, y, x) = static_cast<S>(img.r(y, x));
            t.at(1, y, x) = static_cast<S>(img.g(y, x));
            t.at(2, y, x) = static_cast<S>(img.b(y, x));
        }
    return t;
}

template <class S>
RgbImage rgb_from_tensor(const TensorT<S>& t) {
    require(t.ch == 3, "rgb_from_tensor: need 3 channels");
    RgbImage img(t.h, t.w);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) {
            img.r(y, x) = static_cast<float>(t.at(0, y, x));
            img.g(y, x) = static_cast<float>(t.at(1, y, x));
            img.b(y, x) = static_cast<float>(t.at(2, y, x));
        }
    return img;
}

} // namespace icolor::nn

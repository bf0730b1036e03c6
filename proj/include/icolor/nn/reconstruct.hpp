#pragma once

#include "icolor/colorspace.hpp"
#include "icolor/nn/tensor.hpp"

namespace icolor::nn {

// Differentiable Lab -> sRGB reconstruction on tensors: lightness is a fixed
// input, the 2-channel ab tensor carries gradients. Matches the image-level
// converter up to scalar type. The cache stores d(rgb_c)/d(a) and /d(b) per
// pixel, so the backward pass is two weighted sums.
template <class S>
struct ReconstructCache {
    TensorT<S> dr_da, dr_db; // 3 channels each
};

template <class S>
TensorT<S> lab_to_rgb_tensor(const Plane& L, const TensorT<S>& ab, ReconstructCache<S>* cache = nullptr) {
    require(ab.ch == 2, "lab_to_rgb_tensor: ab tensor must have 2 channels");
    require(static_cast<int>(L.rows()) == ab.h && static_cast<int>(L.cols()) == ab.w,
            "lab_to_rgb_tensor: shape mismatch");

    const auto& m_inv = cie::xyz_to_rgb_matrix<S>();
    const auto& white = cie::d65_white<S>();
    const S delta = S(6) / S(29);

    TensorT<S> rgb(3, ab.h, ab.w);
    if (cache) {
        cache->dr_da = TensorT<S>(3, ab.h, ab.w);
        cache->dr_db = TensorT<S>(3, ab.h, ab.w);
    }
    for (int y = 0; y < ab.h; ++y) {
        for (int x = 0; x < ab.w; ++x) {
            const S fy = (S(L(y, x)) + S(16)) / S(116);
            const S fx = fy + ab.at(0, y, x) / S(500);
            const S fz = fy - ab.at(1, y, x) / S(200);
            const S tx = cie::lab_f_inv(fx);
            const S ty = cie::lab_f_inv(fy);
            const S tz = cie::lab_f_inv(fz);
            // d f_inv / d u
            const S dtx = fx > delta ? S(3) * fx * fx : S(3) * delta * delta;
            const S dtz = fz > delta ? S(3) * fz * fz : S(3) * delta * delta;
            const S xyz[3] = {white[0] * tx, white[1] * ty, white[2] * tz};
            for (int c = 0; c < 3; ++c) {
                const S lin = m_inv(c, 0) * xyz[0] + m_inv(c, 1) * xyz[1] + m_inv(c, 2) * xyz[2];
                S v, dv;
                if (lin <= S(0.0031308)) {
                    v = lin * S(12.92);
                    dv = S(12.92);
                } else {
                    const S root = std::pow(lin, S(1) / S(2.4));
                    v = S(1.055) * root - S(0.055);
                    dv = S(1.055) / S(2.4) * root / lin;
                }
                S pass = S(1);
                if (v < S(0)) { v = S(0); pass = S(0); }
                if (v > S(1)) { v = S(1); pass = S(0); }
                rgb.at(c, y, x) = v;
                if (cache) {
                    cache->dr_da.at(c, y, x) = pass * dv * m_inv(c, 0) * white[0] * dtx / S(500);
                    cache->dr_db.at(c, y, x) = pass * dv * m_inv(c, 2) * white[2] * dtz * (S(-1) / S(200));
                }
            }
        }
    }
    return rgb;
}

template <class S>
TensorT<S> lab_to_rgb_tensor_backward(const ReconstructCache<S>& cache, const TensorT<S>& drgb) {
    TensorT<S> dab(2, drgb.h, drgb.w);
    for (int c = 0; c < 3; ++c) {
        dab.plane(0) += drgb.plane(c) * cache.dr_da.plane(c);
        dab.plane(1) += drgb.plane(c) * cache.dr_db.plane(c);
    }
    return dab;
}

} // namespace icolor::nn

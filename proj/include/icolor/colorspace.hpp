#pragma once

#include <Eigen/Dense>

#include "icolor/image.hpp"

namespace icolor {

// sRGB <-> CIE Lab under D65. The white point is the sRGB matrix applied to
// (1,1,1), so equal-RGB grays map to a = b = 0 exactly.
namespace cie {

template <class S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S> using Mat3 = Eigen::Matrix<S, 3, 3>;

template <class S>
const Mat3<S>& rgb_to_xyz_matrix() {
    static const Mat3<S> m = [] {
        Mat3<S> v;
        v << S(0.4124564), S(0.3575761), S(0.1804375),
             S(0.2126729), S(0.7151522), S(0.0721750),
             S(0.0193339), S(0.1191920), S(0.9503041);
        return v;
    }();
    return m;
}

template <class S>
const Mat3<S>& xyz_to_rgb_matrix() {
    static const Mat3<S> m = rgb_to_xyz_matrix<S>().inverse().eval();
    return m;
}

template <class S>
const Vec3<S>& d65_white() {
    static const Vec3<S> w = (rgb_to_xyz_matrix<S>() * Vec3<S>::Ones()).eval();
    return w;
}

template <class S>
S srgb_to_linear(S v) {
    return v <= S(0.04045) ? v / S(12.92) : std::pow((v + S(0.055)) / S(1.055), S(2.4));
}

template <class S>
S linear_to_srgb(S v) {
    return v <= S(0.0031308) ? v * S(12.92) : S(1.055) * std::pow(v, S(1) / S(2.4)) - S(0.055);
}

// CIE 1976 f(), with the linear segment below (6/29)^3.
template <class S>
S lab_f(S t) {
    const S delta = S(6) / S(29);
    return t > delta * delta * delta ? std::cbrt(t) : t / (S(3) * delta * delta) + S(4) / S(29);
}

template <class S>
S lab_f_inv(S u) {
    const S delta = S(6) / S(29);
    return u > delta ? u * u * u : S(3) * delta * delta * (u - S(4) / S(29));
}

template <class S>
Vec3<S> lab_from_srgb(const Vec3<S>& rgb) {
    Vec3<S> lin(srgb_to_linear(rgb[0]), srgb_to_linear(rgb[1]), srgb_to_linear(rgb[2]));
    Vec3<S> xyz = rgb_to_xyz_matrix<S>() * lin;
    const Vec3<S>& w = d65_white<S>();
    const S fx = lab_f(xyz[0] / w[0]);
    const S fy = lab_f(xyz[1] / w[1]);
    const S fz = lab_f(xyz[2] / w[2]);
    return Vec3<S>(S(116) * fy - S(16), S(500) * (fx - fy), S(200) * (fy - fz));
}

// Inverse transform. If the result leaves [0,1] it is clipped and *clipped
// is set (when non-null).
template <class S>
Vec3<S> srgb_from_lab(const Vec3<S>& lab, bool* clipped = nullptr) {
    const Vec3<S>& w = d65_white<S>();
    const S fy = (lab[0] + S(16)) / S(116);
    const S fx = fy + lab[1] / S(500);
    const S fz = fy - lab[2] / S(200);
    Vec3<S> xyz(w[0] * lab_f_inv(fx), w[1] * lab_f_inv(fy), w[2] * lab_f_inv(fz));
    Vec3<S> lin = xyz_to_rgb_matrix<S>() * xyz;
    Vec3<S> out;
    bool clip = false;
    for (int k = 0; k < 3; ++k) {
        S v = linear_to_srgb(lin[k]);
        if (v < S(0)) { v = S(0); clip = true; }
        if (v > S(1)) { v = S(1); clip = true; }
        out[k] = v;
    }
    if (clipped) *clipped = clip;
    return out;
}

} // namespace cie

struct LabToRgbResult {
    RgbImage image;
    long clipped_pixels = 0;
    bool clipped() const { return clipped_pixels > 0; }
    double clipped_fraction() const {
        const long n = static_cast<long>(image.r.size());
        return n == 0 ? 0.0 : static_cast<double>(clipped_pixels) / static_cast<double>(n);
    }
};

// sRGB -> CIE Lab. Throws std::domain_error if any channel leaves [0,1].
LabImage rgb_to_lab(const RgbImage& img);

// CIE Lab -> sRGB, out-of-gamut values clipped to [0,1] and counted.
LabToRgbResult lab_to_rgb(const LabImage& lab);

// L channel of rgb_to_lab rescaled to [0,1].
Plane luminance_of(const RgbImage& img);

// Replicates a [0,1] luminance plane into an achromatic RGB image.
RgbImage replicate_gray(const Plane& lum);

} // namespace icolor

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace icolor {

// Single image plane, indexed (row, col). float is the pipeline-wide pixel
// scalar; colorimetric kernels run in double and are templated separately.
template <class Scalar>
using PlaneT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Plane  = PlaneT<float>;
using PlaneD = PlaneT<double>;

// Gamma-encoded sRGB image, all channels in [0,1].
struct RgbImage {
    Plane r, g, b;

    RgbImage() = default;
    RgbImage(int height, int width)
        : r(Plane::Zero(height, width)), g(Plane::Zero(height, width)), b(Plane::Zero(height, width)) {}

    int height() const { return static_cast<int>(r.rows()); }
    int width() const { return static_cast<int>(r.cols()); }

    bool same_shape(const RgbImage& o) const { return height() == o.height() && width() == o.width(); }
};

// CIE Lab image: L in [0,100], a/b nominally in [-128,127].
struct LabImage {
    Plane L, a, b;

    LabImage() = default;
    LabImage(int height, int width)
        : L(Plane::Zero(height, width)), a(Plane::Zero(height, width)), b(Plane::Zero(height, width)) {}

    int height() const { return static_cast<int>(L.rows()); }
    int width() const { return static_cast<int>(L.cols()); }
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

inline void require_same_shape(const Plane& a, const Plane& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": plane shapes differ");
}

inline bool valid_unit_range(const RgbImage& img) {
    auto ok = [](const Plane& p) { return (p >= 0.0f).all() && (p <= 1.0f).all(); };
    return ok(img.r) && ok(img.g) && ok(img.b);
}

} // namespace icolor

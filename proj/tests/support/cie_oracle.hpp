#pragma once

// Independent scalar transcription of the published sRGB(D65) <-> CIE Lab
// equations, kept free of any library code so it can serve as the oracle
// for the conversion tests. Plain doubles, exact rational CIE constants.

#include <cmath>

namespace oracle {

inline double gamma_expand(double u) {
    return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

inline double gamma_compress(double u) {
    return u <= 0.0031308 ? 12.92 * u : 1.055 * std::pow(u, 1.0 / 2.4) - 0.055;
}

// Forward sRGB -> XYZ matrix (7-digit published values); the white point is
// the matrix applied to (1,1,1).
constexpr double kM[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

inline void white_point(double wp[3]) {
    for (int i = 0; i < 3; ++i) wp[i] = kM[i][0] + kM[i][1] + kM[i][2];
}

inline double cie_f(double t) {
    const double eps = 216.0 / 24389.0;   // (6/29)^3
    const double kappa = 24389.0 / 27.0;  // (29/3)^3
    return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

inline double cie_f_inv(double u) {
    const double u3 = u * u * u;
    const double eps = 216.0 / 24389.0;
    const double kappa = 24389.0 / 27.0;
    return u3 > eps ? u3 : (116.0 * u - 16.0) / kappa;
}

inline void srgb_to_lab(double r, double g, double b, double* L, double* a, double* bb) {
    const double lin[3] = {gamma_expand(r), gamma_expand(g), gamma_expand(b)};
    double xyz[3];
    for (int i = 0; i < 3; ++i) xyz[i] = kM[i][0] * lin[0] + kM[i][1] * lin[1] + kM[i][2] * lin[2];
    double wp[3];
    white_point(wp);
    const double fx = cie_f(xyz[0] / wp[0]);
    const double fy = cie_f(xyz[1] / wp[1]);
    const double fz = cie_f(xyz[2] / wp[2]);
    *L = 116.0 * fy - 16.0;
    *a = 500.0 * (fx - fy);
    *bb = 200.0 * (fy - fz);
}

// Inverse via the adjugate of kM, computed here rather than copied, so the
// oracle stays self-contained.
inline void invert3(const double m[3][3], double inv[3][3]) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
}

// Returns true if the result had to be clipped to [0,1].
inline bool lab_to_srgb(double L, double a, double bb, double* r, double* g, double* b) {
    double wp[3];
    white_point(wp);
    const double fy = (L + 16.0) / 116.0;
    const double fx = fy + a / 500.0;
    const double fz = fy - bb / 200.0;
    const double xyz[3] = {wp[0] * cie_f_inv(fx), wp[1] * cie_f_inv(fy), wp[2] * cie_f_inv(fz)};
    double minv[3][3];
    invert3(kM, minv);
    double out[3];
    bool clipped = false;
    for (int i = 0; i < 3; ++i) {
        double v = gamma_compress(minv[i][0] * xyz[0] + minv[i][1] * xyz[1] + minv[i][2] * xyz[2]);
        if (v < 0.0) { v = 0.0; clipped = true; }
        if (v > 1.0) { v = 1.0; clipped = true; }
        out[i] = v;
    }
    *r = out[0];
    *g = out[1];
    *b = out[2];
    return clipped;
}

} // namespace oracle

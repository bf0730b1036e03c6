#include "icolor/colorspace.hpp"

namespace icolor {

LabImage rgb_to_lab(const RgbImage& img) {
    require(img.height() >= 1 && img.width() >= 1, "rgb_to_lab: empty image");
    require_same_shape(img.r, img.g, "rgb_to_lab");
    require_same_shape(img.r, img.b, "rgb_to_lab");
    if (!valid_unit_range(img)) throw std::domain_error("rgb_to_lab: channel value outside [0,1]");

    LabImage out(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const cie::Vec3<double> rgb(img.r(y, x), img.g(y, x), img.b(y, x));
            const cie::Vec3<double> lab = cie::lab_from_srgb(rgb);
            out.L(y, x) = static_cast<float>(lab[0]);
            out.a(y, x) = static_cast<float>(lab[1]);
            out.b(y, x) = static_cast<float>(lab[2]);
        }
    }
    return out;
}

LabToRgbResult lab_to_rgb(const LabImage& lab) {
    require(lab.height() >= 1 && lab.width() >= 1, "lab_to_rgb: empty image");
    require_same_shape(lab.L, lab.a, "lab_to_rgb");
    require_same_shape(lab.L, lab.b, "lab_to_rgb");

    LabToRgbResult res;
    res.image = RgbImage(lab.height(), lab.width());
    for (int y = 0; y < lab.height(); ++y) {
        for (int x = 0; x < lab.width(); ++x) {
            bool clipped = false;
            const cie::Vec3<double> v(lab.L(y, x), lab.a(y, x), lab.b(y, x));
            const cie::Vec3<double> rgb = cie::srgb_from_lab(v, &clipped);
            res.image.r(y, x) = static_cast<float>(rgb[0]);
            res.image.g(y, x) = static_cast<float>(rgb[1]);
            res.image.b(y, x) = static_cast<float>(rgb[2]);
            if (clipped) ++res.clipped_pixels;
        }
    }
    return res;
}

Plane luminance_of(const RgbImage& img) {
    require(img.height() >= 1 && img.width() >= 1, "luminance_of: empty image");
    if (!valid_unit_range(img)) throw std::domain_error("luminance_of: channel value outside [0,1]");

    Plane lum(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const cie::Vec3<double> rgb(img.r(y, x), img.g(y, x), img.b(y, x));
            lum(y, x) = static_cast<float>(cie::lab_from_srgb(rgb)[0] / 100.0);
        }
    }
    return lum;
}

RgbImage replicate_gray(const Plane& lum) {
    RgbImage out;
    out.r = lum;
    out.g = lum;
    out.b = lum;
    return out;
}

} // namespace icolor

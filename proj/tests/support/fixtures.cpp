#include "fixtures.hpp"

#include <cmath>

#include "icolor/rng.hpp"

namespace fixtures {

using icolor::Plane;
using icolor::Rng;

namespace {

// Sum of a few random low-frequency sinusoids, values roughly in [-1,1].
Plane smooth_field(Rng& rng, int h, int w, int waves) {
    Plane out = Plane::Zero(h, w);
    for (int k = 0; k < waves; ++k) {
        const double fy = rng.uniform(0.5, 2.5) * 2.0 * M_PI / h;
        const double fx = rng.uniform(0.5, 2.5) * 2.0 * M_PI / w;
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const double amp = rng.uniform(0.4, 1.0) / waves;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out(y, x) += static_cast<float>(amp * std::sin(fy * y + fx * x + phase));
    }
    return out;
}

void add_soft_blob(Rng& rng, Plane& pa, Plane& pb) {
    const int h = static_cast<int>(pa.rows()), w = static_cast<int>(pa.cols());
    const double cy = rng.uniform(0.15, 0.85) * h;
    const double cx = rng.uniform(0.15, 0.85) * w;
    const double ry = rng.uniform(0.08, 0.3) * h;
    const double rx = rng.uniform(0.08, 0.3) * w;
    const double da = rng.uniform(-14.0, 14.0);
    const double db = rng.uniform(-14.0, 14.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d2 = std::pow((y - cy) / ry, 2) + std::pow((x - cx) / rx, 2);
            const double wgt = std::exp(-0.5 * d2);
            pa(y, x) += static_cast<float>(da * wgt);
            pb(y, x) += static_cast<float>(db * wgt);
        }
    }
}

} // namespace

icolor::RgbImage natural_image(std::uint64_t seed, int h, int w) {
    Rng rng(Rng::combine(seed, 0xf1c5));

    icolor::LabImage lab(h, w);
    lab.L = 52.0f + 24.0f * smooth_field(rng, h, w, 3);
    lab.L = lab.L.cwiseMax(18.0f).cwiseMin(88.0f);

    lab.a = 16.0f * smooth_field(rng, h, w, 2);
    lab.b = 16.0f * smooth_field(rng, h, w, 2);
    const int blobs = rng.range(2, 4);
    for (int k = 0; k < blobs; ++k) add_soft_blob(rng, lab.a, lab.b);
    lab.a = lab.a.cwiseMax(-30.0f).cwiseMin(30.0f);
    lab.b = lab.b.cwiseMax(-30.0f).cwiseMin(30.0f);

    return icolor::lab_to_rgb(lab).image;
}

std::vector<icolor::RgbImage> natural_corpus(std::uint64_t seed, int count, int h, int w) {
    std::vector<icolor::RgbImage> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(natural_image(Rng::combine(seed, i), h, w));
    return out;
}

icolor::RgbImage random_rgb(std::uint64_t seed, int h, int w) {
    Rng rng(Rng::combine(seed, 0xabcd));
    icolor::RgbImage img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.r(y, x) = static_cast<float>(rng.uniform());
            img.g(y, x) = static_cast<float>(rng.uniform());
            img.b(y, x) = static_cast<float>(rng.uniform());
        }
    return img;
}

} // namespace fixtures

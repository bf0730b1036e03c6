#include "icolor/simulation.hpp"

#include <cmath>

#include "icolor/imageops.hpp"
#include "icolor/rng.hpp"

namespace icolor {

namespace {

bool inside_region(const RegionSpec& r, double scale, int y, int x) {
    const double dy = (y + 0.5 - r.cy) / (r.ry * scale);
    const double dx = (x + 0.5 - r.cx) / (r.rx * scale);
    if (r.kind == RegionSpec::Kind::rectangle) return std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
    const double rad = std::hypot(dy, dx);
    if (rad < 1e-12) return true;
    const double theta = std::atan2(dy, dx);
    const double limit = 1.0 + r.wobble * std::sin(r.lobes * theta + r.phase);
    return rad <= limit;
}

Plane rasterize(const std::vector<RegionSpec>& regions, double scale, int h, int w) {
    Plane mask = Plane::Zero(h, w);
    for (const auto& r : regions) {
        // Bounding window, wobble included.
        const double ry = r.ry * scale * (1.0 + r.wobble);
        const double rx = r.rx * scale * (1.0 + r.wobble);
        const int y0 = std::max(0, static_cast<int>(std::floor(r.cy - ry - 1)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(r.cy + ry + 1)));
        const int x0 = std::max(0, static_cast<int>(std::floor(r.cx - rx - 1)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(r.cx + rx + 1)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (mask(y, x) == 0.0f && inside_region(r, scale, y, x)) mask(y, x) = 1.0f;
    }
    return mask;
}

double coverage_of(const Plane& mask) {
    return static_cast<double>(mask.sum()) / static_cast<double>(mask.size());
}

} // namespace

SimulationMask sample_mask(int h, int w, std::uint64_t seed, const MaskConfig& cfg) {
    require(h >= 1 && w >= 1, "sample_mask: empty shape");
    require(cfg.min_coverage <= cfg.max_coverage, "sample_mask: min_coverage > max_coverage");

    SimulationMask out;
    if (cfg.max_coverage <= 0.0) {
        out.mask = Plane::Zero(h, w);
        return out;
    }
    if (cfg.min_coverage >= 1.0) {
        out.mask = Plane::Ones(h, w);
        RegionSpec full;
        full.kind = RegionSpec::Kind::rectangle;
        full.cy = h / 2.0;
        full.cx = w / 2.0;
        full.ry = h;
        full.rx = w;
        full.area_fraction = 1.0;
        out.regions.push_back(full);
        return out;
    }

    Rng rng(Rng::combine(seed, 0x5eed0));
    const double target = rng.uniform(cfg.min_coverage, cfg.max_coverage);
    const int count = rng.range(std::max(1, cfg.min_regions), std::max(1, cfg.max_regions));

    // Split the target area across regions.
    std::vector<double> weights(static_cast<size_t>(count));
    double wsum = 0.0;
    for (auto& v : weights) {
        v = 0.2 + rng.uniform();
        wsum += v;
    }

    std::vector<RegionSpec> regions;
    for (int k = 0; k < count; ++k) {
        RegionSpec r;
        const double area = target * weights[static_cast<size_t>(k)] / wsum * h * w;
        const double aspect = std::exp(rng.uniform(-0.7, 0.7));
        r.kind = rng.uniform() < cfg.blob_probability ? RegionSpec::Kind::blob : RegionSpec::Kind::rectangle;
        r.cy = rng.uniform(0.0, h);
        r.cx = rng.uniform(0.0, w);
        if (r.kind == RegionSpec::Kind::rectangle) {
            // area = 4 ry rx
            r.ry = std::sqrt(area * aspect / 4.0);
            r.rx = std::sqrt(area / aspect / 4.0);
        } else {
            // area ~ pi ry rx
            r.ry = std::sqrt(area * aspect / M_PI);
            r.rx = std::sqrt(area / aspect / M_PI);
            r.lobes = rng.range(3, 5);
            r.phase = rng.uniform(0.0, 2.0 * M_PI);
            r.wobble = rng.uniform(0.1, 0.35);
        }
        r.ry = std::max(r.ry, 0.5);
        r.rx = std::max(r.rx, 0.5);
        r.area_fraction = area / (h * w);
        regions.push_back(r);
    }

    // Clipping at borders and overlap push the union outside the band;
    // rescale all regions about their centers until it lands inside.
    double scale = 1.0;
    Plane mask = rasterize(regions, scale, h, w);
    double cov = coverage_of(mask);
    if (cov < cfg.min_coverage || cov > cfg.max_coverage) {
        double lo = 0.0, hi = 1.0;
        if (cov < cfg.min_coverage) {
            hi = 1.0;
            while (cov < target && hi < 1024.0) {
                hi *= 2.0;
                mask = rasterize(regions, hi, h, w);
                cov = coverage_of(mask);
            }
            lo = hi / 2.0;
        }
        for (int iter = 0; iter < 48; ++iter) {
            scale = 0.5 * (lo + hi);
            mask = rasterize(regions, scale, h, w);
            cov = coverage_of(mask);
            if (cov >= cfg.min_coverage && cov <= cfg.max_coverage) break;
            if (cov > cfg.max_coverage) hi = scale;
            else lo = scale;
        }
        for (auto& r : regions) {
            r.ry *= scale;
            r.rx *= scale;
            r.area_fraction *= scale * scale;
        }
    }

    out.mask = std::move(mask);
    out.regions = std::move(regions);
    return out;
}

RgbImage simulate_reference(const Plane& X, const Chroma& Y, const Chroma& Y_fake, const SimulationMask& M) {
    require_same_shape(X, Y.a, "simulate_reference");
    require_same_shape(X, Y.b, "simulate_reference");
    require_same_shape(X, Y_fake.a, "simulate_reference");
    require_same_shape(X, Y_fake.b, "simulate_reference");
    require_same_shape(X, M.mask, "simulate_reference");

    LabImage lab;
    lab.L = X;
    lab.a = Y.a * (1.0f - M.mask) + Y_fake.a * M.mask;
    lab.b = Y.b * (1.0f - M.mask) + Y_fake.b * M.mask;
    return lab_to_rgb(lab).image;
}

std::vector<TrainingSample> make_training_batch(const std::vector<RgbImage>& images, std::uint64_t seed,
                                                const MaskConfig& cfg) {
    require(images.size() >= 2, "make_training_batch: pool must contain at least 2 images");

    const int n = static_cast<int>(images.size());
    std::vector<LabImage> labs;
    labs.reserve(images.size());
    for (const auto& img : images) labs.push_back(rgb_to_lab(img));

    std::vector<TrainingSample> batch;
    batch.reserve(images.size());
    for (int i = 0; i < n; ++i) {
        Rng rng(Rng::combine(seed, static_cast<std::uint64_t>(i), 0xba7c4));
        TrainingSample s;
        s.source_index = i;
        s.donor_index = static_cast<int>((i + 1 + rng.below(static_cast<std::uint64_t>(n - 1))) % n);
        s.X = labs[static_cast<size_t>(i)].L;
        s.Y.a = labs[static_cast<size_t>(i)].a;
        s.Y.b = labs[static_cast<size_t>(i)].b;

        const int h = static_cast<int>(s.X.rows()), w = static_cast<int>(s.X.cols());
        Chroma fake;
        fake.a = bilinear_resize(labs[static_cast<size_t>(s.donor_index)].a, h, w);
        fake.b = bilinear_resize(labs[static_cast<size_t>(s.donor_index)].b, h, w);

        s.M = sample_mask(h, w, Rng::combine(seed, static_cast<std::uint64_t>(i), 0x3a5c), cfg);
        s.R_prime = simulate_reference(s.X, s.Y, fake, s.M);
        batch.push_back(std::move(s));
    }
    return batch;
}

} // namespace icolor

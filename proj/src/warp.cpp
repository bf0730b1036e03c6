#include "icolor/warp.hpp"

#include "icolor/imageops.hpp"

namespace icolor {

namespace {

using nn::Tensor;

// position-major feature matrix at 1/4 resolution: relu2_2 pooled to 1/4
// concatenated with relu3_2, centered per channel, L2-normalized per row.
Eigen::MatrixXf correspondence_features(const Plane& lum01, const nn::FeatureExtractor& fe) {
    Tensor rgb(3, static_cast<int>(lum01.rows()), static_cast<int>(lum01.cols()));
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x) {
            const float v = lum01(y, x);
            rgb.at(0, y, x) = v;
            rgb.at(1, y, x) = v;
            rgb.at(2, y, x) = v;
        }

    const auto stages = fe.forward(rgb, 3);
    const Tensor f2 = nn::avgpool2(stages.taps[1]); // 1/2 -> 1/4
    const Tensor& f3 = stages.taps[2];              // 1/4

    const long n = f3.plane_size();
    Eigen::MatrixXf feats(n, f2.ch + f3.ch);
    for (int c = 0; c < f2.ch; ++c) feats.col(c) = f2.plane(c).matrix();
    for (int c = 0; c < f3.ch; ++c) feats.col(f2.ch + c) = f3.plane(c).matrix();

    feats.rowwise() -= feats.colwise().mean();
    for (long i = 0; i < n; ++i) {
        const float norm = feats.row(i).norm();
        if (norm > 1e-8f) feats.row(i) /= norm;
    }
    return feats;
}

} // namespace

WarpedReference warp_reference(const Plane& lum01, const RgbImage& reference,
                               const nn::FeatureExtractor& extractor, const WarpConfig& cfg) {
    const int h = static_cast<int>(lum01.rows()), w = static_cast<int>(lum01.cols());
    require(h == reference.height() && w == reference.width(), "warp_reference: shapes disagree");
    require(h >= 4 && w >= 4, "warp_reference: image too small");

    const Plane in_pad = reflect_pad_to_multiple(lum01, 4);
    const int hp = static_cast<int>(in_pad.rows()), wp = static_cast<int>(in_pad.cols());

    const LabImage ref_lab = rgb_to_lab(reference);
    const Plane ref_lum_pad = reflect_pad_to_multiple(Plane(ref_lab.L / 100.0f), 4);
    const Plane ref_a_low = downsample2_avg(downsample2_avg(reflect_pad_to_multiple(ref_lab.a, 4)));
    const Plane ref_b_low = downsample2_avg(downsample2_avg(reflect_pad_to_multiple(ref_lab.b, 4)));

    const Eigen::MatrixXf fx = correspondence_features(in_pad, extractor);
    const Eigen::MatrixXf fr = correspondence_features(ref_lum_pad, extractor);

    const int lh = hp / 4, lw = wp / 4;
    const long n = static_cast<long>(lh) * lw;
    Eigen::MatrixXf ref_ab(n, 2);
    for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x) {
            ref_ab(static_cast<long>(y) * lw + x, 0) = ref_a_low(y, x);
            ref_ab(static_cast<long>(y) * lw + x, 1) = ref_b_low(y, x);
        }

    Plane warped_a_low(lh, lw), warped_b_low(lh, lw), conf_low(lh, lw);
    const float inv_temp = 1.0f / cfg.temperature;
    const long block = std::max(1, cfg.row_block);
    Eigen::MatrixXf logits, probs;
    for (long row0 = 0; row0 < n; row0 += block) {
        const long rows = std::min(block, n - row0);
        logits.noalias() = fx.middleRows(row0, rows) * fr.transpose();
        logits *= inv_temp;
        probs = logits;
        for (long i = 0; i < rows; ++i) {
            const float m = probs.row(i).maxCoeff();
            probs.row(i) = (probs.row(i).array() - m).exp();
            probs.row(i) /= probs.row(i).sum();
        }
        const Eigen::MatrixXf agg = probs * ref_ab;
        for (long i = 0; i < rows; ++i) {
            const long p = row0 + i;
            const int y = static_cast<int>(p / lw), x = static_cast<int>(p % lw);
            warped_a_low(y, x) = agg(i, 0);
            warped_b_low(y, x) = agg(i, 1);
            conf_low(y, x) = probs.row(i).maxCoeff();
        }
    }

    WarpedReference out;
    out.warped_chroma.a = crop(bilinear_resize(warped_a_low, hp, wp), 0, 0, h, w);
    out.warped_chroma.b = crop(bilinear_resize(warped_b_low, hp, wp), 0, 0, h, w);
    out.confidence = crop(bilinear_resize(conf_low, hp, wp), 0, 0, h, w).cwiseMax(0.0f).cwiseMin(1.0f);
    return out;
}

} // namespace icolor

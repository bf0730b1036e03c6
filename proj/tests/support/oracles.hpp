#pragma once

// Brute-force reimplementations used as oracles by the unit and acceptance
// suites. Deliberately independent of the library's own loops: iterate
// segments, then candidates, then pixels.

#include <cmath>
#include <map>

#include "icolor/composition.hpp"

namespace oracles {

inline std::map<int, int> brute_force_assign(const icolor::Plane& gray_lum,
                                             const icolor::ReferenceSet& refs,
                                             std::map<int, std::vector<double>>* scores_out = nullptr) {
    const icolor::SegmentationMap& seg = refs.segmentation;
    std::vector<icolor::Plane> lums;
    for (int i = 0; i < refs.count(); ++i) lums.push_back(icolor::luminance_of(refs.references[i]));

    std::map<int, int> beta;
    for (const auto& s : seg.segments) {
        std::vector<double> scores(refs.count(), icolor::kFailedScore);
        for (int i = 0; i < refs.count(); ++i) {
            if (!refs.ok[i]) continue;
            double sum = 0.0;
            for (int p : s.pixels) {
                const int y = p / seg.width, x = p % seg.width;
                sum += std::abs(static_cast<double>(lums[i](y, x)) - static_cast<double>(gray_lum(y, x)));
            }
            scores[i] = sum;
        }
        int best = icolor::kExcluded;
        double best_val = icolor::kFailedScore;
        for (int i = 0; i < refs.count(); ++i)
            if (std::isfinite(scores[i]) && scores[i] < best_val) {
                best_val = scores[i];
                best = i;
            }
        beta[s.id] = best;
        if (scores_out) (*scores_out)[s.id] = scores;
    }
    return beta;
}

} // namespace oracles

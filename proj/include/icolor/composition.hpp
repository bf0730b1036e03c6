#pragma once

#include <limits>
#include <map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "icolor/imagination.hpp"

namespace icolor {

// Sentinel for a segment the user removed from the composition.
constexpr int kExcluded = -1;

struct CompositionEdit {
    enum class Action { exclude, set_reference, reset };
    int segment_id = 0;
    Action action = Action::exclude;
    int reference_index = -1; // only for set_reference
};

// Per-segment choice of reference plus the audit trail. Values are
// immutable; edits return a new assignment.
struct CompositionAssignment {
    std::map<int, int> beta;                    // segment id -> reference index or kExcluded
    std::map<int, std::vector<double>> scores;  // segment id -> L1 luminance sums per candidate
    std::vector<CompositionEdit> edit_log;

    int candidate_count() const {
        return scores.empty() ? 0 : static_cast<int>(scores.begin()->second.size());
    }
};

struct ComposedReference {
    RgbImage image;
    LabelMap provenance;  // per-pixel reference index, kExcluded where excluded
    Plane excluded_mask;  // 1 where the segment is excluded
};

// Failed candidates carry an infinite score and can never be chosen.
constexpr double kFailedScore = std::numeric_limits<double>::infinity();

// Lowest index attaining the minimum score; kExcluded if none is finite.
int argmin_choice(const std::vector<double>& scores);

// For every segment, pick the candidate whose luminance is closest to the
// input in summed absolute difference. gray_lum is the input's [0,1] L.
CompositionAssignment assign_segments(const Plane& gray_lum, const ReferenceSet& refs);

// Copy each segment's pixels from its chosen candidate. Excluded segments
// are filled with the replicated grayscale so they carry no chroma.
ComposedReference assemble_reference(const CompositionAssignment& assignment, const ReferenceSet& refs,
                                     const Plane& gray_lum);

CompositionAssignment edit_assignment(const CompositionAssignment& assignment, int segment_id,
                                      CompositionEdit::Action action, int reference_index = -1);

nlohmann::json assignment_to_json(const CompositionAssignment& assignment);
CompositionAssignment assignment_from_json(const nlohmann::json& j);

} // namespace icolor

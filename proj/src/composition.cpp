#include "icolor/composition.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace icolor {

int argmin_choice(const std::vector<double>& scores) {
    int best = kExcluded;
    double best_score = kFailedScore;
    for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
        if (std::isfinite(scores[static_cast<size_t>(i)]) && scores[static_cast<size_t>(i)] < best_score) {
            best_score = scores[static_cast<size_t>(i)];
            best = i;
        }
    }
    return best;
}

CompositionAssignment assign_segments(const Plane& gray_lum, const ReferenceSet& refs) {
    require(refs.count() >= 1, "assign_segments: empty reference set");
    require(refs.ok_count() >= 1, "assign_segments: no usable references");
    const SegmentationMap& seg = refs.segmentation;
    require(static_cast<int>(gray_lum.rows()) == seg.height && static_cast<int>(gray_lum.cols()) == seg.width,
            "assign_segments: luminance shape mismatch");

    CompositionAssignment out;
    for (const auto& s : seg.segments)
        out.scores[s.id] = std::vector<double>(static_cast<size_t>(refs.count()), kFailedScore);

    const int w = seg.width;
    for (int i = 0; i < refs.count(); ++i) {
        if (!refs.ok[static_cast<size_t>(i)]) continue;
        const Plane lum = luminance_of(refs.references[static_cast<size_t>(i)]);
        for (const auto& s : seg.segments) {
            if (s.pixels.empty()) continue;
            double sum = 0.0;
            for (int p : s.pixels) {
                const int y = p / w, x = p % w;
                sum += std::abs(static_cast<double>(lum(y, x)) - static_cast<double>(gray_lum(y, x)));
            }
            out.scores[s.id][static_cast<size_t>(i)] = sum;
        }
    }
    for (const auto& s : seg.segments) {
        if (s.pixels.empty()) continue; // cannot occur under the partition invariant
        out.beta[s.id] = argmin_choice(out.scores[s.id]);
    }
    return out;
}

ComposedReference assemble_reference(const CompositionAssignment& assignment, const ReferenceSet& refs,
                                     const Plane& gray_lum) {
    const SegmentationMap& seg = refs.segmentation;
    require(static_cast<int>(gray_lum.rows()) == seg.height && static_cast<int>(gray_lum.cols()) == seg.width,
            "assemble_reference: luminance shape mismatch");

    ComposedReference out;
    out.image = RgbImage(seg.height, seg.width);
    out.provenance = LabelMap::Constant(seg.height, seg.width, kExcluded);
    out.excluded_mask = Plane::Zero(seg.height, seg.width);

    const int w = seg.width;
    for (const auto& s : seg.segments) {
        auto it = assignment.beta.find(s.id);
        if (it == assignment.beta.end())
            throw std::invalid_argument("assemble_reference: assignment missing segment " + std::to_string(s.id));
        const int idx = it->second;
        if (idx == kExcluded) {
            for (int p : s.pixels) {
                const int y = p / w, x = p % w;
                out.image.r(y, x) = gray_lum(y, x);
                out.image.g(y, x) = gray_lum(y, x);
                out.image.b(y, x) = gray_lum(y, x);
                out.excluded_mask(y, x) = 1.0f;
            }
            continue;
        }
        if (idx < 0 || idx >= refs.count())
            throw std::out_of_range("assemble_reference: reference index out of range for segment " +
                                    std::to_string(s.id));
        if (!refs.ok[static_cast<size_t>(idx)])
            throw std::invalid_argument("assemble_reference: segment " + std::to_string(s.id) +
                                        " assigned to a failed reference");
        const RgbImage& src = refs.references[static_cast<size_t>(idx)];
        for (int p : s.pixels) {
            const int y = p / w, x = p % w;
            out.image.r(y, x) = src.r(y, x);
            out.image.g(y, x) = src.g(y, x);
            out.image.b(y, x) = src.b(y, x);
            out.provenance(y, x) = idx;
        }
    }
    return out;
}

CompositionAssignment edit_assignment(const CompositionAssignment& assignment, int segment_id,
                                      CompositionEdit::Action action, int reference_index) {
    auto it = assignment.beta.find(segment_id);
    if (it == assignment.beta.end())
        throw std::invalid_argument("edit_assignment: unknown segment " + std::to_string(segment_id));

    CompositionAssignment out = assignment;
    const auto& seg_scores = out.scores.at(segment_id);
    switch (action) {
        case CompositionEdit::Action::exclude:
            out.beta[segment_id] = kExcluded;
            break;
        case CompositionEdit::Action::set_reference: {
            if (reference_index < 0 || reference_index >= static_cast<int>(seg_scores.size()))
                throw std::out_of_range("edit_assignment: reference index out of range");
            if (!std::isfinite(seg_scores[static_cast<size_t>(reference_index)]))
                throw std::invalid_argument("edit_assignment: reference sample failed, cannot select it");
            out.beta[segment_id] = reference_index;
            break;
        }
        case CompositionEdit::Action::reset:
            out.beta[segment_id] = argmin_choice(seg_scores);
            break;
    }
    out.edit_log.push_back({segment_id, action, action == CompositionEdit::Action::set_reference ? reference_index : -1});
    return out;
}

namespace {

const char* action_name(CompositionEdit::Action a) {
    switch (a) {
        case CompositionEdit::Action::exclude: return "exclude";
        case CompositionEdit::Action::set_reference: return "set_reference";
        case CompositionEdit::Action::reset: return "reset";
    }
    return "unknown";
}

CompositionEdit::Action action_from_name(const std::string& name) {
    if (name == "exclude") return CompositionEdit::Action::exclude;
    if (name == "set_reference") return CompositionEdit::Action::set_reference;
    if (name == "reset") return CompositionEdit::Action::reset;
    throw std::invalid_argument("unknown edit action: " + name);
}

} // namespace

nlohmann::json assignment_to_json(const CompositionAssignment& assignment) {
    nlohmann::json j;
    j["beta"] = nlohmann::json::object();
    for (const auto& [id, idx] : assignment.beta) j["beta"][std::to_string(id)] = idx;
    j["scores"] = nlohmann::json::object();
    for (const auto& [id, row] : assignment.scores) {
        nlohmann::json arr = nlohmann::json::array();
        for (double v : row) {
            if (std::isfinite(v)) arr.push_back(v);
            else arr.push_back(nullptr); // failed candidate
        }
        j["scores"][std::to_string(id)] = std::move(arr);
    }
    j["edit_log"] = nlohmann::json::array();
    for (const auto& e : assignment.edit_log) {
        nlohmann::json entry{{"segment_id", e.segment_id}, {"action", action_name(e.action)}};
        if (e.action == CompositionEdit::Action::set_reference) entry["reference_index"] = e.reference_index;
        j["edit_log"].push_back(std::move(entry));
    }
    return j;
}

CompositionAssignment assignment_from_json(const nlohmann::json& j) {
    CompositionAssignment out;
    for (auto it = j.at("beta").begin(); it != j.at("beta").end(); ++it)
        out.beta[std::stoi(it.key())] = it.value().get<int>();
    for (auto it = j.at("scores").begin(); it != j.at("scores").end(); ++it) {
        std::vector<double> row;
        for (const auto& v : it.value()) row.push_back(v.is_null() ? kFailedScore : v.get<double>());
        out.scores[std::stoi(it.key())] = std::move(row);
    }
    if (j.contains("edit_log")) {
        for (const auto& entry : j.at("edit_log")) {
            CompositionEdit e;
            e.segment_id = entry.at("segment_id").get<int>();
            e.action = action_from_name(entry.at("action").get<std::string>());
            e.reference_index = entry.value("reference_index", -1);
            out.edit_log.push_back(e);
        }
    }
    return out;
}

} // namespace icolor

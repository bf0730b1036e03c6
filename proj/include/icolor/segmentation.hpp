#pragma once

#include <map>
#include <string>
#include <vector>

#include "icolor/image.hpp"
#include "icolor/imageio.hpp"

namespace icolor {

struct PixelBox {
    int y0 = 0, x0 = 0, y1 = 0, x1 = 0; // inclusive
};

struct Segment {
    int id = 0;
    int class_id = -1;
    std::vector<int> pixels; // linear indices y * width + x, row-major ascending
    PixelBox bbox;
};

// Per-pixel semantic class labels plus the segment partition derived from
// them. Segments are 4-connected components of equal class; pixels with a
// negative class are collected into the reserved fallback segment id 0.
struct SegmentationMap {
    int height = 0, width = 0;
    LabelMap class_labels;            // H x W semantic class ids (-1 = unlabeled)
    LabelMap segment_ids;             // H x W segment ids
    std::vector<Segment> segments;    // ascending by id
    std::map<int, std::string> class_names;

    const Segment* find(int segment_id) const {
        for (const auto& s : segments)
            if (s.id == segment_id) return &s;
        return nullptr;
    }
    int class_of(int segment_id) const {
        const Segment* s = find(segment_id);
        return s ? s->class_id : -1;
    }
    std::string class_name(int class_id) const {
        auto it = class_names.find(class_id);
        if (it != class_names.end()) return it->second;
        return class_id < 0 ? "unlabeled" : "class_" + std::to_string(class_id);
    }
};

// Builds the segment partition from a class-label map. Labeled components
// get ids 1..N in row-major discovery order; unlabeled pixels (class < 0)
// share segment id 0.
SegmentationMap segmentation_from_classes(const LabelMap& class_labels);

// Every pixel carries exactly one segment id and the segment pixel sets
// cover the image.
bool is_partition(const SegmentationMap& seg);

} // namespace icolor

#include "icolor/segmentation.hpp"

#include <deque>

namespace icolor {

SegmentationMap segmentation_from_classes(const LabelMap& class_labels) {
    const int h = static_cast<int>(class_labels.rows());
    const int w = static_cast<int>(class_labels.cols());
    require(h >= 1 && w >= 1, "segmentation_from_classes: empty label map");

    SegmentationMap seg;
    seg.height = h;
    seg.width = w;
    seg.class_labels = class_labels;
    seg.segment_ids = LabelMap::Constant(h, w, -1);

    int next_id = 1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (seg.segment_ids(y, x) >= 0) continue;
            const int cls = class_labels(y, x);
            const int id = cls < 0 ? 0 : next_id++;
            // BFS flood fill over the 4-neighbourhood
            std::deque<std::pair<int, int>> queue{{y, x}};
            seg.segment_ids(y, x) = id;
            while (!queue.empty()) {
                auto [cy, cx] = queue.front();
                queue.pop_front();
                const int dy[4] = {-1, 1, 0, 0};
                const int dx[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int ny = cy + dy[k], nx = cx + dx[k];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    if (seg.segment_ids(ny, nx) >= 0) continue;
                    const int ncls = class_labels(ny, nx);
                    const bool same = cls < 0 ? ncls < 0 : ncls == cls;
                    if (!same) continue;
                    seg.segment_ids(ny, nx) = id;
                    queue.emplace_back(ny, nx);
                }
            }
        }
    }

    // Fallback pixels are one shared segment regardless of adjacency.
    std::map<int, Segment> by_id;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int cls = class_labels(y, x);
            if (cls < 0) seg.segment_ids(y, x) = 0;
            const int id = seg.segment_ids(y, x);
            auto [it, fresh] = by_id.try_emplace(id);
            Segment& s = it->second;
            if (fresh) {
                s.id = id;
                s.class_id = cls < 0 ? -1 : cls;
                s.bbox = {y, x, y, x};
            }
            s.pixels.push_back(y * w + x);
            s.bbox.y0 = std::min(s.bbox.y0, y);
            s.bbox.x0 = std::min(s.bbox.x0, x);
            s.bbox.y1 = std::max(s.bbox.y1, y);
            s.bbox.x1 = std::max(s.bbox.x1, x);
        }
    }
    seg.segments.reserve(by_id.size());
    for (auto& [id, s] : by_id) seg.segments.push_back(std::move(s));
    return seg;
}

bool is_partition(const SegmentationMap& seg) {
    if (seg.height <= 0 || seg.width <= 0) return false;
    const size_t total = static_cast<size_t>(seg.height) * seg.width;
    std::vector<char> seen(total, 0);
    size_t count = 0;
    for (const auto& s : seg.segments) {
        for (int p : s.pixels) {
            if (p < 0 || static_cast<size_t>(p) >= total) return false;
            if (seen[p]) return false;
            if (seg.segment_ids(p / seg.width, p % seg.width) != s.id) return false;
            seen[p] = 1;
            ++count;
        }
    }
    return count == total;
}

} // namespace icolor

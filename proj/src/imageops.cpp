#include "icolor/imageops.hpp"

#include <cmath>

namespace icolor {

Plane bilinear_resize(const Plane& src, int out_h, int out_w) {
    const int h = static_cast<int>(src.rows()), w = static_cast<int>(src.cols());
    require(h >= 1 && w >= 1 && out_h >= 1 && out_w >= 1, "bilinear_resize: empty plane");
    if (h == out_h && w == out_w) return src;

    Plane out(out_h, out_w);
    const double sy = static_cast<double>(h) / out_h;
    const double sx = static_cast<double>(w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
        const int y0 = std::min(h - 1, static_cast<int>(fy));
        const int y1 = std::min(h - 1, y0 + 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
            const int x0 = std::min(w - 1, static_cast<int>(fx));
            const int x1 = std::min(w - 1, x0 + 1);
            const double wx = fx - x0;
            const double v = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                             wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
            out(y, x) = static_cast<float>(v);
        }
    }
    return out;
}

Plane downsample2_avg(const Plane& src) {
    const int h = static_cast<int>(src.rows()) / 2, w = static_cast<int>(src.cols()) / 2;
    require(h >= 1 && w >= 1, "downsample2_avg: plane too small");
    Plane out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out(y, x) = 0.25f * (src(2 * y, 2 * x) + src(2 * y, 2 * x + 1) + src(2 * y + 1, 2 * x) +
                                 src(2 * y + 1, 2 * x + 1));
    return out;
}

Plane crop(const Plane& src, int y0, int x0, int h, int w) {
    require(y0 >= 0 && x0 >= 0 && y0 + h <= src.rows() && x0 + w <= src.cols(), "crop: window out of range");
    return src.block(y0, x0, h, w);
}

Plane reflect_pad_to_multiple(const Plane& src, int multiple) {
    const int h = static_cast<int>(src.rows()), w = static_cast<int>(src.cols());
    const int ph = (multiple - h % multiple) % multiple;
    const int pw = (multiple - w % multiple) % multiple;
    if (ph == 0 && pw == 0) return src;
    require(ph < h && pw < w, "reflect_pad_to_multiple: image smaller than padding");
    Plane out(h + ph, w + pw);
    for (int y = 0; y < h + ph; ++y) {
        const int sy = y < h ? y : 2 * h - 2 - y;
        for (int x = 0; x < w + pw; ++x) {
            const int sx = x < w ? x : 2 * w - 2 - x;
            out(y, x) = src(sy, sx);
        }
    }
    return out;
}

RgbImage crop(const RgbImage& src, int y0, int x0, int h, int w) {
    RgbImage out;
    out.r = crop(src.r, y0, x0, h, w);
    out.g = crop(src.g, y0, x0, h, w);
    out.b = crop(src.b, y0, x0, h, w);
    return out;
}

} // namespace icolor

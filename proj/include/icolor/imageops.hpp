#pragma once

#include "icolor/image.hpp"

namespace icolor {

// Bilinear resize with half-pixel centers (align_corners = false).
Plane bilinear_resize(const Plane& src, int out_h, int out_w);

// 2x2 average pooling; odd trailing row/col handled by shrinking to floor.
Plane downsample2_avg(const Plane& src);

Plane crop(const Plane& src, int y0, int x0, int h, int w);

// Reflect-pad (edge pixels not repeated) on the bottom/right so the plane
// reaches a multiple of `multiple`.
Plane reflect_pad_to_multiple(const Plane& src, int multiple);

RgbImage crop(const RgbImage& src, int y0, int x0, int h, int w);

} // namespace icolor

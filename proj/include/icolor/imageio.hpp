#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "icolor/image.hpp"

namespace icolor {

using LabelMap = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic>;
using Bytes = std::vector<std::uint8_t>;

// Decoding promotes grayscale to RGB and drops alpha. Values land in [0,1]
// via /255 (or /65535 for 16-bit color). Throws std::runtime_error on
// malformed input.
RgbImage decode_image(const Bytes& bytes);
RgbImage load_image(const std::filesystem::path& path);

Bytes encode_png(const RgbImage& img);
void save_png(const std::filesystem::path& path, const RgbImage& img);

Bytes encode_jpeg(const RgbImage& img, int quality = 95);
void save_jpeg(const std::filesystem::path& path, const RgbImage& img, int quality = 95);

// 8-bit single-channel PNG of a [0,1] plane (mask / luminance export).
Bytes encode_gray_png(const Plane& plane);
void save_gray_png(const std::filesystem::path& path, const Plane& plane);
Plane load_gray_png(const std::filesystem::path& path);

// 16-bit single-channel PNG of integer labels in [0, 65535].
Bytes encode_label_png(const LabelMap& labels);
void save_label_png(const std::filesystem::path& path, const LabelMap& labels);
LabelMap decode_label_png(const Bytes& bytes);
LabelMap load_label_png(const std::filesystem::path& path);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);

bool looks_like_png(const Bytes& bytes);
bool looks_like_jpeg(const Bytes& bytes);

} // namespace icolor

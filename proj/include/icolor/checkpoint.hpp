#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace icolor {

// Single-file archive: magic, little-endian manifest length, JSON manifest,
// then raw float32 blobs in manifest order.
struct BlobTensor {
    std::string name;
    const float* data = nullptr;
    long count = 0;
};

void write_blob_file(const std::filesystem::path& path, nlohmann::json manifest,
                     const std::vector<BlobTensor>& tensors);

struct BlobFile {
    nlohmann::json manifest;
    std::map<std::string, std::vector<float>> tensors;
};

BlobFile read_blob_file(const std::filesystem::path& path);

} // namespace icolor

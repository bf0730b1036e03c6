#include "icolor/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace icolor {

namespace {
constexpr char kMagic[8] = {'I', 'C', 'K', 'P', 'T', '1', '\n', '\0'};
}

void write_blob_file(const std::filesystem::path& path, nlohmann::json manifest,
                     const std::vector<BlobTensor>& tensors) {
    nlohmann::json index = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& t : tensors) {
        index.push_back({{"name", t.name}, {"count", t.count}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(t.count) * sizeof(float);
    }
    manifest["tensors"] = std::move(index);
    const std::string text = manifest.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : tensors)
        out.write(reinterpret_cast<const char*>(t.data), static_cast<std::streamsize>(t.count * sizeof(float)));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

BlobFile read_blob_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());

    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path.string());

    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("truncated checkpoint manifest: " + path.string());

    BlobFile file;
    file.manifest = nlohmann::json::parse(text);
    for (const auto& entry : file.manifest.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const long count = entry.at("count").get<long>();
        std::vector<float> blob(static_cast<size_t>(count));
        in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(count * sizeof(float)));
        if (!in) throw std::runtime_error("truncated checkpoint blob '" + name + "': " + path.string());
        file.tensors.emplace(name, std::move(blob));
    }
    return file;
}

} // namespace icolor

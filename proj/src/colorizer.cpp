#include "icolor/colorizer.hpp"

#include "icolor/checkpoint.hpp"
#include "icolor/imageops.hpp"

namespace icolor {

nn::Tensor colorizer_input(const Plane& lightness, const WarpedReference& warped) {
    const int h = static_cast<int>(lightness.rows()), w = static_cast<int>(lightness.cols());
    require(static_cast<int>(warped.warped_chroma.a.rows()) == h &&
                static_cast<int>(warped.warped_chroma.a.cols()) == w,
            "colorizer_input: warped chroma shape mismatch");
    nn::Tensor x(4, h, w);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            x.at(0, y, xx) = lightness(y, xx) / 100.0f * 2.0f - 1.0f;
            x.at(1, y, xx) = warped.warped_chroma.a(y, xx) / kAbScale;
            x.at(2, y, xx) = warped.warped_chroma.b(y, xx) / kAbScale;
            x.at(3, y, xx) = warped.confidence(y, xx);
        }
    return x;
}

Chroma predict_chroma(const Plane& lightness, const WarpedReference& warped, const ColorizerModel& model) {
    const int h = static_cast<int>(lightness.rows()), w = static_cast<int>(lightness.cols());
    const int factor = model.config.unet.downscale_factor();

    WarpedReference padded;
    padded.warped_chroma.a = reflect_pad_to_multiple(warped.warped_chroma.a, factor);
    padded.warped_chroma.b = reflect_pad_to_multiple(warped.warped_chroma.b, factor);
    padded.confidence = reflect_pad_to_multiple(warped.confidence, factor);
    const Plane light_pad = reflect_pad_to_multiple(lightness, factor);

    const nn::Tensor out = model.net.forward(colorizer_input(light_pad, padded));

    Chroma ab;
    ab.a = crop(out.to_plane(0), 0, 0, h, w) * kAbScale;
    ab.b = crop(out.to_plane(1), 0, 0, h, w) * kAbScale;
    ab.a = ab.a.cwiseMax(-128.0f).cwiseMin(127.0f);
    ab.b = ab.b.cwiseMax(-128.0f).cwiseMin(127.0f);
    return ab;
}

RgbImage colorize_with_reference(const Plane& lightness, const RgbImage& reference,
                                 const ColorizerModel& model) {
    const WarpConfig wcfg{model.config.warp_temperature, 4096};
    const WarpedReference warped =
        warp_reference(Plane(lightness / 100.0f), reference, *model.extractor, wcfg);
    const Chroma ab = predict_chroma(lightness, warped, model);
    LabImage lab;
    lab.L = lightness;
    lab.a = ab.a;
    lab.b = ab.b;
    return lab_to_rgb(lab).image;
}

RgbImage colorize(const RgbImage& input, const RgbImage& reference, const ColorizerModel& model) {
    const LabImage lab = rgb_to_lab(input);
    return colorize_with_reference(lab.L, reference, model);
}

void save_checkpoint(const std::filesystem::path& path, const ColorizerModel& model) {
    nlohmann::json manifest{
        {"version", 1},
        {"kind", "colorizer"},
        {"unet",
         {{"in_ch", model.config.unet.in_ch},
          {"out_ch", model.config.unet.out_ch},
          {"base", model.config.unet.base},
          {"levels", model.config.unet.levels}}},
        {"extractor", {{"widths", model.config.extractor.widths}, {"seed", model.config.extractor.seed}}},
        {"warp_temperature", model.config.warp_temperature},
        {"normalization",
         {{"lightness", "(L/100)*2-1"}, {"chroma", "ab/110"}, {"confidence", "identity"}, {"output", "ab/110"}}},
        {"training_seed", model.training_seed},
    };

    std::vector<nn::ParamView<float>> params;
    const_cast<nn::UNet&>(model.net).collect(params);
    std::vector<BlobTensor> tensors;
    tensors.reserve(params.size());
    for (const auto& p : params) tensors.push_back({p.name, p.value, p.size});
    write_blob_file(path, std::move(manifest), tensors);
}

ColorizerModel load_checkpoint(const std::filesystem::path& path) {
    BlobFile file = read_blob_file(path);
    const auto& m = file.manifest;
    if (!m.contains("version") || m.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint version in " + path.string());
    if (m.value("kind", "") != "colorizer")
        throw std::runtime_error("not a colorizer checkpoint: " + path.string());

    ColorizerConfig cfg;
    cfg.unet.in_ch = m.at("unet").at("in_ch").get<int>();
    cfg.unet.out_ch = m.at("unet").at("out_ch").get<int>();
    cfg.unet.base = m.at("unet").at("base").get<int>();
    cfg.unet.levels = m.at("unet").at("levels").get<int>();
    const auto widths = m.at("extractor").at("widths").get<std::vector<int>>();
    require(widths.size() == cfg.extractor.widths.size(), "checkpoint: bad extractor widths");
    std::copy(widths.begin(), widths.end(), cfg.extractor.widths.begin());
    cfg.extractor.seed = m.at("extractor").at("seed").get<std::uint64_t>();
    cfg.warp_temperature = m.at("warp_temperature").get<float>();

    ColorizerModel model(cfg, m.value("training_seed", 0ull));
    std::vector<nn::ParamView<float>> params;
    model.net.collect(params);
    for (auto& p : params) {
        auto it = file.tensors.find(p.name);
        if (it == file.tensors.end())
            throw std::runtime_error("checkpoint missing tensor '" + p.name + "': " + path.string());
        if (static_cast<long>(it->second.size()) != p.size)
            throw std::runtime_error("checkpoint tensor size mismatch for '" + p.name + "'");
        std::copy(it->second.begin(), it->second.end(), p.value);
    }
    return model;
}

} // namespace icolor

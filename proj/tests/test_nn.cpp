#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "icolor/checkpoint.hpp"
#include "icolor/colorizer.hpp"
#include "icolor/nn/adam.hpp"
#include "icolor/nn/features.hpp"
#include "icolor/nn/unet.hpp"
#include "icolor/rng.hpp"

using namespace icolor;
using namespace icolor::nn;

namespace {

template <class S>
TensorT<S> random_tensor(std::uint64_t seed, int c, int h, int w, double scale = 1.0) {
    Rng rng(Rng::combine(seed, 0x7e57));
    TensorT<S> t(c, h, w);
    for (long i = 0; i < t.size(); ++i) t.data[i] = static_cast<S>(rng.gaussian() * scale);
    return t;
}

// FD check helper: |g_fd - g_an| / |g_fd| over all components of `x`,
// where f is a scalar function and g_an the analytic gradient.
template <class F>
double fd_relative_error(Eigen::ArrayXd& x, Eigen::ArrayXd& analytic, F&& f, double eps = 1e-5) {
    Eigen::ArrayXd fd(x.size());
    for (long i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double hi = f();
        x[i] = keep - eps;
        const double lo = f();
        x[i] = keep;
        fd[i] = (hi - lo) / (2 * eps);
    }
    const double denom = std::sqrt(fd.square().sum());
    return denom == 0 ? std::sqrt((fd - analytic).square().sum())
                      : std::sqrt((fd - analytic).square().sum()) / denom;
}

} // namespace

TEST_SUITE_BEGIN("nn");

TEST_CASE("conv forward matches a naive convolution") {
    Conv2d<double> conv(2, 3);
    conv.init_he(1);
    const TensorT<double> x = random_tensor<double>(2, 2, 5, 6);
    const TensorT<double> y = conv.forward(x);
    REQUIRE(y.ch == 3);

    for (int co = 0; co < 3; ++co)
        for (int yy = 0; yy < 5; ++yy)
            for (int xx = 0; xx < 6; ++xx) {
                double acc = conv.bias[co];
                for (int ci = 0; ci < 2; ++ci)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int sy = yy + dy, sx = xx + dx;
                            if (sy < 0 || sy >= 5 || sx < 0 || sx >= 6) continue;
                            acc += conv.weight((ci * 3 + dy + 1) * 3 + dx + 1, co) * x.at(ci, sy, sx);
                        }
                CHECK(y.at(co, yy, xx) == doctest::Approx(acc).epsilon(1e-10));
            }
}

TEST_CASE("conv backward matches finite differences") {
    Conv2d<double> conv(2, 2);
    conv.init_he(3);
    TensorT<double> x = random_tensor<double>(4, 2, 4, 4);
    const TensorT<double> target = random_tensor<double>(5, 2, 4, 4);

    // loss = 0.5 sum (conv(x) - target)^2
    auto loss_of = [&] {
        const TensorT<double> y = conv.forward(x);
        return 0.5 * (y.data - target.data).square().sum();
    };
    TensorT<double> y = conv.forward(x);
    TensorT<double> dy(2, 4, 4);
    dy.data = y.data - target.data;
    conv.zero_grad();
    const TensorT<double> dx = conv.backward(x, dy);

    {
        Eigen::ArrayXd flat = x.data;
        Eigen::ArrayXd analytic = dx.data;
        auto f = [&] { x.data = flat; return loss_of(); };
        CHECK(fd_relative_error(flat, analytic, f) < 1e-7);
        x.data = flat;
    }
    {
        Eigen::ArrayXd flat = Eigen::Map<Eigen::ArrayXd>(conv.weight.data(), conv.weight.size());
        Eigen::ArrayXd analytic = Eigen::Map<Eigen::ArrayXd>(conv.dweight.data(), conv.dweight.size());
        auto f = [&] {
            Eigen::Map<Eigen::ArrayXd>(conv.weight.data(), conv.weight.size()) = flat;
            return loss_of();
        };
        CHECK(fd_relative_error(flat, analytic, f) < 1e-7);
    }
}

TEST_CASE("instance norm backward matches finite differences") {
    InstanceNorm<double> norm(3);
    Rng rng(9);
    for (int c = 0; c < 3; ++c) {
        norm.gamma[c] = 0.5 + rng.uniform();
        norm.beta[c] = rng.gaussian() * 0.1;
    }
    TensorT<double> x = random_tensor<double>(10, 3, 4, 5);
    const TensorT<double> target = random_tensor<double>(11, 3, 4, 5);

    auto loss_of = [&] {
        const TensorT<double> y = norm.forward(x);
        return 0.5 * (y.data - target.data).square().sum();
    };
    InstanceNorm<double>::Cache cache;
    TensorT<double> y = norm.forward(x, &cache);
    TensorT<double> dy(3, 4, 5);
    dy.data = y.data - target.data;
    norm.zero_grad();
    const TensorT<double> dx = norm.backward(cache, dy);

    Eigen::ArrayXd flat = x.data;
    Eigen::ArrayXd analytic = dx.data;
    auto f = [&] { x.data = flat; return loss_of(); };
    CHECK(fd_relative_error(flat, analytic, f, 1e-6) < 1e-6);
}

TEST_CASE("unet gradient matches finite differences on a tiny model") {
    UNetConfig cfg;
    cfg.in_ch = 3;
    cfg.out_ch = 2;
    cfg.base = 2;
    cfg.levels = 2;
    UNetT<double> net(cfg, 5);
    // non-zero final layer so gradients reach every parameter
    net.final_conv().init_he(7);

    TensorT<double> x = random_tensor<double>(20, 3, 8, 8);
    const TensorT<double> target = random_tensor<double>(21, 2, 8, 8);
    auto loss_of = [&] {
        const TensorT<double> y = net.forward(x);
        return 0.5 * (y.data - target.data).square().sum();
    };

    UNetT<double>::Cache cache;
    const TensorT<double> y = net.forward(x, &cache);
    TensorT<double> dy(2, 8, 8);
    dy.data = y.data - target.data;
    net.zero_grad();
    const TensorT<double> dx = net.backward(cache, dy);

    {
        Eigen::ArrayXd flat = x.data;
        Eigen::ArrayXd analytic = dx.data;
        auto f = [&] { x.data = flat; return loss_of(); };
        CHECK(fd_relative_error(flat, analytic, f, 1e-6) < 1e-5);
    }

    // spot-check parameters of an encoder conv and a decoder norm
    std::vector<ParamView<double>> params;
    net.collect(params);
    int checked = 0;
    for (auto& p : params) {
        if (p.name != "enc0.c1.weight" && p.name != "dec1.n2.gamma" && p.name != "final.weight") continue;
        Eigen::Map<Eigen::ArrayXd> value(p.value, p.size);
        Eigen::ArrayXd flat = value;
        Eigen::ArrayXd analytic = Eigen::Map<Eigen::ArrayXd>(p.grad, p.size);
        auto f = [&] { value = flat; return loss_of(); };
        CHECK(fd_relative_error(flat, analytic, f, 1e-6) < 1e-5);
        ++checked;
    }
    CHECK(checked == 3);
}

TEST_CASE("fresh unet predicts exactly zero chroma") {
    UNetConfig cfg;
    cfg.base = 4;
    cfg.levels = 2;
    UNet net(cfg, 1);
    const Tensor x = random_tensor<float>(30, 4, 16, 16);
    const Tensor y = net.forward(x);
    CHECK(y.ch == 2);
    CHECK(y.h == 16);
    CHECK(y.w == 16);
    CHECK((y.data == 0.0f).all());
}

TEST_CASE("unet rejects indivisible input sizes") {
    UNet net(UNetConfig{}, 1);
    const Tensor x = random_tensor<float>(31, 4, 24, 24); // 24 % 16 != 0
    CHECK_THROWS_AS(net.forward(x), std::invalid_argument);
}

TEST_CASE("adam drives a quadratic to its minimum") {
    Eigen::ArrayXf value = Eigen::ArrayXf::Constant(4, 5.0f);
    Eigen::ArrayXf grad = Eigen::ArrayXf::Zero(4);
    std::vector<ParamView<float>> params{{"x", value.data(), grad.data(), 4}};
    Adam<float> opt(params, 0.1f);
    for (int i = 0; i < 500; ++i) {
        grad = value - 1.5f;
        opt.step();
    }
    CHECK((value - 1.5f).abs().maxCoeff() < 1e-2f);
}

TEST_CASE("feature extractor is deterministic per seed and shape-correct") {
    FeatureExtractorConfig cfg;
    cfg.widths = {4, 8, 8, 8, 8};
    cfg.seed = 77;
    const FeatureExtractor fe1(cfg), fe2(cfg);
    const Tensor x = random_tensor<float>(40, 3, 16, 16, 0.2);
    const auto f1 = fe1.forward(x);
    const auto f2 = fe2.forward(x);
    for (int l = 0; l < 5; ++l) CHECK((f1.taps[l].data == f2.taps[l].data).all());

    CHECK(f1.taps[0].h == 16);
    CHECK(f1.taps[1].h == 8);
    CHECK(f1.taps[2].h == 4);
    CHECK(f1.taps[3].h == 2);
    CHECK(f1.taps[4].h == 1);

    FeatureExtractorConfig other = cfg;
    other.seed = 78;
    const FeatureExtractor fe3(other);
    CHECK_FALSE((fe3.forward(x).taps[0].data == f1.taps[0].data).all());
}

TEST_CASE("checkpoint round trip reproduces outputs bit-exactly") {
    ColorizerConfig cfg;
    cfg.unet.base = 4;
    cfg.unet.levels = 2;
    cfg.extractor.widths = {4, 8, 8, 8, 8};
    ColorizerModel model(cfg, 99);
    // give the net non-trivial parameters
    std::vector<ParamView<float>> params;
    model.net.collect(params);
    Rng rng(123);
    for (auto& p : params)
        for (long i = 0; i < p.size; ++i) p.value[i] += static_cast<float>(rng.gaussian() * 0.05);

    const auto path = std::filesystem::temp_directory_path() / "icolor_ckpt_test.ckpt";
    save_checkpoint(path, model);
    const ColorizerModel loaded = load_checkpoint(path);
    CHECK(loaded.config.unet.base == 4);
    CHECK(loaded.training_seed == 99);

    const Tensor x = random_tensor<float>(50, 4, 16, 16, 0.3);
    const Tensor y1 = model.net.forward(x);
    const Tensor y2 = loaded.net.forward(x);
    CHECK((y1.data == y2.data).all());
}

TEST_CASE("corrupt checkpoints are rejected") {
    const auto path = std::filesystem::temp_directory_path() / "icolor_ckpt_bad.ckpt";
    std::ofstream(path) << "definitely not a checkpoint";
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
}

TEST_SUITE_END();

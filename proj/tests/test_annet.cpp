#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <random>

#include "nsp/annet.hpp"
#include "nsp/stimulus.hpp"

using namespace nsp;

namespace {

// Independent re-implementation of the layer algebra with the per-unit noise
// level frozen at externally supplied values. The trainer differentiates the
// loss with the variance channel held constant, so the finite-difference
// oracle must evaluate the same frozen-noise model.
std::vector<std::vector<double>> frozen_sigmas(const WeightStore& ws,
                                               const std::vector<double>& x,
                                               const ActivationKind& kind) {
    const auto duals = forward(ws, x, kind);
    std::vector<std::vector<double>> sigmas;
    for (const auto& d : duals) {
        std::vector<double> s(d.net.size(), 0.0);
        for (std::size_t i = 0; i < d.var.size(); ++i) s[i] = std::sqrt(d.var[i]);
        sigmas.push_back(std::move(s));
    }
    return sigmas;
}

double frozen_loss(const WeightStore& ws, const std::vector<double>& x,
                   const ActivationKind& kind, const std::vector<double>& target,
                   const std::vector<std::vector<double>>& sigmas) {
    const auto shapes = layer_shapes(ws.arch, ws.input);
    std::vector<double> cur = x;
    Shape in = ws.input;
    for (std::size_t l = 0; l < ws.arch.size(); ++l) {
        const Shape out = shapes[l];
        std::vector<double> net(out.size(), 0.0);
        const auto& spec = ws.arch[l];
        if (spec.kind == LayerSpec::Kind::Conv) {
            const int k = spec.kernel;
            for (int oc = 0; oc < out.c; ++oc)
                for (int oy = 0; oy < out.h; ++oy)
                    for (int ox = 0; ox < out.w; ++ox) {
                        double acc = 0.0;
                        for (int ic = 0; ic < in.c; ++ic)
                            for (int ky = 0; ky < k; ++ky)
                                for (int kx = 0; kx < k; ++kx)
                                    acc += ws.tensors[l][((static_cast<std::size_t>(oc) * in.c +
                                                           ic) * k + ky) * k + kx] *
                                           cur[(ic * in.h + oy + ky) * in.w + ox + kx];
                        net[(oc * out.h + oy) * out.w + ox] = acc;
                    }
        } else if (spec.kind == LayerSpec::Kind::AvgPool) {
            const int s = spec.stride;
            const double w = 1.0 / (static_cast<double>(s) * s);
            for (int c = 0; c < out.c; ++c)
                for (int oy = 0; oy < out.h; ++oy)
                    for (int ox = 0; ox < out.w; ++ox) {
                        double acc = 0.0;
                        for (int dy = 0; dy < s; ++dy)
                            for (int dx = 0; dx < s; ++dx)
                                acc += cur[(c * in.h + oy * s + dy) * in.w + ox * s + dx];
                        net[(c * out.h + oy) * out.w + ox] = acc * w;
                    }
        } else {
            const int n_in = in.size();
            for (int o = 0; o < out.c; ++o) {
                double acc = 0.0;
                for (int i = 0; i < n_in; ++i)
                    acc += ws.tensors[l][static_cast<std::size_t>(o) * n_in + i] * cur[i];
                net[o] = acc;
            }
        }
        std::vector<double> y(net.size());
        for (std::size_t i = 0; i < net.size(); ++i)
            y[i] = combined_forward(ws.activation, net[i], sigmas[l][i], ws.scale);
        cur = std::move(y);
        in = out;
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
        loss += 0.5 * (cur[i] - target[i]) * (cur[i] - target[i]);
    return loss;
}

Dataset block_dataset(int per_class, std::uint64_t seed) {
    // each class lights one of ten column bands; trivially separable
    Dataset data;
    data.rows = 10;
    data.cols = 10;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(0.0, 0.15);
    for (int c = 0; c < 10; ++c)
        for (int i = 0; i < per_class; ++i) {
            for (int y = 0; y < 10; ++y)
                for (int x = 0; x < 10; ++x)
                    data.images.push_back(
                        static_cast<float>(x == c ? 0.9 + noise(rng) * 0.1 : noise(rng)));
            data.labels.push_back(static_cast<std::uint8_t>(c));
        }
    return data;
}

}  // namespace

TEST_CASE("architecture strings round-trip") {
    const auto arch = parse_arch("6c5-2s-12c5-2s-10fc");
    REQUIRE(arch.size() == 5);
    CHECK(arch[0].kind == LayerSpec::Kind::Conv);
    CHECK(arch[0].out_maps == 6);
    CHECK(arch[0].kernel == 5);
    CHECK(arch[1].kind == LayerSpec::Kind::AvgPool);
    CHECK(arch[1].stride == 2);
    CHECK(arch[4].kind == LayerSpec::Kind::Dense);
    CHECK(arch[4].out_units == 10);
    CHECK(arch_to_string(arch) == "6c5-2s-12c5-2s-10fc");
    CHECK_THROWS_AS(parse_arch("6x5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_arch(""), std::invalid_argument);
}

TEST_CASE("layer shapes follow valid-convolution geometry") {
    const auto arch = parse_arch("6c5-2s-12c5-2s-10fc");
    const auto shapes = layer_shapes(arch, {1, 28, 28});
    REQUIRE(shapes.size() == 5);
    CHECK(shapes[0].c == 6);
    CHECK(shapes[0].h == 24);
    CHECK(shapes[0].w == 24);
    CHECK(shapes[1].h == 12);
    CHECK(shapes[2].c == 12);
    CHECK(shapes[2].h == 8);
    CHECK(shapes[3].h == 4);
    CHECK(shapes[4].size() == 10);
    CHECK_THROWS_AS(layer_shapes(parse_arch("6c5"), {1, 4, 4}), std::invalid_argument);
    CHECK_THROWS_AS(layer_shapes(parse_arch("6c5-5s"), {1, 28, 28}), std::invalid_argument);
}

TEST_CASE("weight init is bounded, seeded and bias-free") {
    const auto arch = parse_arch("6c5-2s-10fc");
    const ActivationKind kind{ActKind::Relu, 0.3, 0.45};
    const CombinedScale scale{201.0, 5.0};
    const auto a = init_weights(arch, {1, 28, 28}, kind, scale, 7);
    const auto b = init_weights(arch, {1, 28, 28}, kind, scale, 7);
    const auto c = init_weights(arch, {1, 28, 28}, kind, scale, 8);
    CHECK(a.tensors == b.tensors);
    CHECK(a.tensors != c.tensors);
    CHECK(a.tensors[1].empty());  // avgpool holds no trainable weights

    // conv fan_in = 25, fan_out = 6*25
    const double bound0 = std::sqrt(6.0 / (25.0 + 150.0));
    for (double w : a.tensors[0]) CHECK(std::fabs(w) <= bound0);
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("forward: zero input stays zero under relu") {
    const auto arch = parse_arch("4c3-2s-10fc");
    const ActivationKind kind{ActKind::Relu, 0.3, 0.45};
    const auto ws = init_weights(arch, {1, 10, 10}, kind, {201.0, 5.0}, 3);
    const std::vector<double> x(100, 0.0);
    const auto duals = forward(ws, x, kind);
    for (double v : duals.back().y) CHECK(v == 0.0);
}

TEST_CASE("forward: hand-computed dual channel of a two-input unit") {
    WeightStore ws;
    ws.arch = parse_arch("1fc");
    ws.input = {1, 1, 2};
    ws.activation = {ActKind::NoisySoftplus, 0.3, 0.45};
    ws.scale = {201.0, 5.0};
    ws.tensors = {{1.0, -1.0}};
    const auto duals = forward(ws, {0.3, 0.1}, ws.activation);
    CHECK(duals.back().net[0] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(duals.back().var[0] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("variance channel equals the ensemble-statistics formula unit-wise") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uw(-0.3, 0.3), ur(0.0, 400.0);
    const double tau_syn = 5.0;
    WeightStore ws;
    ws.arch = parse_arch("3fc");
    ws.input = {1, 1, 8};
    ws.activation = {ActKind::NoisySoftplus, 0.3, 0.45};
    ws.scale = {201.0, tau_syn};
    ws.tensors = {std::vector<double>(24)};
    std::vector<double> rates(8);
    for (auto& w : ws.tensors[0]) w = uw(rng);
    for (auto& r : rates) r = ur(rng);

    std::vector<double> x(8);
    for (int i = 0; i < 8; ++i) x[i] = rates[i] * tau_syn / 1000.0;  // lambda tau
    const auto duals = forward(ws, x, ws.activation);

    for (int j = 0; j < 3; ++j) {
        PoissonEnsembleSpec spec;
        for (int i = 0; i < 8; ++i) {
            spec.weights.push_back(ws.tensors[0][j * 8 + i]);
            spec.rates.push_back(rates[i]);
        }
        const auto stats = ensemble_to_stats(spec, tau_syn);
        CHECK(duals.back().net[j] == doctest::Approx(stats.mean).epsilon(1e-12));
        CHECK(duals.back().var[j] == doctest::Approx(stats.variance).epsilon(1e-12));
    }
}

TEST_CASE("rate-coded input encoding") {
    const float pixels[3] = {0.0f, 0.6f, 1.0f};
    const auto x = encode_input(pixels, 3, 100.0, 5.0);
    CHECK(x[0] == doctest::Approx(0.0));
    CHECK(x[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(x[2] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("backward: zero loss gives zero gradients; residual linearity holds") {
    const auto arch = parse_arch("2c3-2s-4fc");
    const ActivationKind kind{ActKind::Relu, 0.3, 0.45};
    const auto ws = init_weights(arch, {1, 6, 6}, kind, {201.0, 5.0}, 5);
    std::vector<double> x(36);
    for (int i = 0; i < 36; ++i) x[i] = 0.01 * (i % 7);
    const auto duals = forward(ws, x, kind);
    const auto y = duals.back().y;

    const auto zero_grads = backward(ws, x, duals, kind, y);
    for (const auto& layer : zero_grads)
        for (double g : layer) CHECK(g == doctest::Approx(0.0).epsilon(1e-14));

    // gradient is linear in the residual: target t vs mirrored 2y - t
    std::vector<double> t(y.size()), mirror(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        t[i] = y[i] + 0.3 + 0.1 * static_cast<double>(i);
        mirror[i] = 2.0 * y[i] - t[i];
    }
    const auto g1 = backward(ws, x, duals, kind, t);
    const auto g2 = backward(ws, x, duals, kind, mirror);
    for (std::size_t l = 0; l < g1.size(); ++l)
        for (std::size_t i = 0; i < g1[l].size(); ++i)
            CHECK(g1[l][i] == doctest::Approx(-g2[l][i]).epsilon(1e-10));
}

TEST_CASE("backward matches central finite differences for all activation kinds") {
    const auto arch = parse_arch("2c3-2s-3fc");
    for (ActKind kindval : {ActKind::Relu, ActKind::NoisySoftplus, ActKind::Softplus}) {
        const ActivationKind kind{kindval, 0.3, 0.45};
        auto ws = init_weights(arch, {1, 6, 6}, kind, {201.0, 5.0}, 17);
        std::vector<double> x(36);
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> ux(0.0, 0.5);
        for (auto& v : x) v = ux(rng);
        const std::vector<double> target{0.2, 0.9, 0.1};

        const auto duals = forward(ws, x, kind);
        const auto grads = backward(ws, x, duals, kind, target);
        const auto sigmas = frozen_sigmas(ws, x, kind);

        const double h = 1e-5;
        double max_rel = 0.0;
        for (std::size_t l = 0; l < ws.tensors.size(); ++l) {
            for (std::size_t i = 0; i < ws.tensors[l].size(); ++i) {
                const double keep = ws.tensors[l][i];
                ws.tensors[l][i] = keep + h;
                const double up = frozen_loss(ws, x, kind, target, sigmas);
                ws.tensors[l][i] = keep - h;
                const double dn = frozen_loss(ws, x, kind, target, sigmas);
                ws.tensors[l][i] = keep;
                const double fd = (up - dn) / (2.0 * h);
                const double scale = std::fmax(std::fabs(fd), 1e-6);
                max_rel = std::fmax(max_rel, std::fabs(grads[l][i] - fd) / scale);
            }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("training with zero learning rate is the identity") {
    const auto data = block_dataset(3, 2);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.lr0 = 0.0;
    cfg.activation = {ActKind::Relu, 0.3, 0.45};
    cfg.scale = {201.0, 5.0};
    cfg.seed = 9;
    const auto arch = parse_arch("4c3-2s-10fc");
    const auto before = init_weights(arch, {1, data.rows, data.cols}, cfg.activation,
                                     cfg.scale, cfg.seed);
    const auto result = train(data, arch, cfg);
    CHECK(result.weights.tensors == before.tensors);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    const auto data = block_dataset(5, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.lr0 = 0.3;
    cfg.activation = {ActKind::NoisySoftplus, 0.3, 0.45};
    cfg.scale = {201.0, 5.0};
    cfg.seed = 11;
    const auto arch = parse_arch("2c3-2s-10fc");
    const auto a = train(data, arch, cfg);
    const auto b = train(data, arch, cfg);
    CHECK(a.weights.tensors == b.weights.tensors);
    REQUIRE(a.loss_curve.size() == b.loss_curve.size());
    for (std::size_t i = 0; i < a.loss_curve.size(); ++i)
        CHECK(a.loss_curve[i].loss == b.loss_curve[i].loss);
}

TEST_CASE("training makes progress on a separable toy problem") {
    const auto data = block_dataset(20, 6);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.lr0 = 8.0;
    // noisy softplus: a bias-free single relu layer can strand output units
    // with zero gradient, the soft curve always recovers
    cfg.activation = {ActKind::NoisySoftplus, 0.3, 0.45};
    cfg.scale = {201.0, 5.0};
    cfg.seed = 3;
    const auto result = train(data, parse_arch("10fc"), cfg);
    const double first = result.loss_curve.front().loss;
    const double last = result.loss_curve.back().loss;
    CHECK(last < first / 5.0);
    CHECK(evaluate_ann(result.weights, data, cfg.activation) < 0.05);
}

TEST_CASE("divergent training aborts with diagnostics") {
    const auto data = block_dataset(5, 8);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.lr0 = 1e300;
    cfg.activation = {ActKind::Relu, 0.3, 0.45};
    cfg.scale = {201.0, 5.0};
    CHECK_THROWS_AS(train(data, parse_arch("10fc"), cfg), std::runtime_error);
}

TEST_CASE("fine tuning: zero learning rate is the identity, metadata updated") {
    const auto data = block_dataset(3, 10);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.lr0 = 0.2;
    cfg.activation = {ActKind::Relu, 0.3, 0.45};
    cfg.scale = {201.0, 5.0};
    const auto base = train(data, parse_arch("10fc"), cfg).weights;

    TrainConfig ft = cfg;
    ft.lr0 = 0.0;
    ft.label_offset = 0.01;
    const auto tuned = fine_tune(base, data, ft).weights;
    CHECK(tuned.tensors == base.tensors);
    CHECK(tuned.activation.kind == ActKind::NoisySoftplus);
    CHECK(tuned.provenance.find("finetune") != std::string::npos);
    CHECK(tuned.epochs == base.epochs + 1);
}

TEST_CASE("weight files round-trip through manifest + blob") {
    const auto arch = parse_arch("3c3-2s-5fc");
    const ActivationKind kind{ActKind::NoisySoftplus, 0.27, 0.45};
    auto ws = init_weights(arch, {1, 8, 8}, kind, {188.0, 5.0}, 21);
    ws.epochs = 4;
    ws.provenance = "train";
    const std::string base = "weights_roundtrip_test";
    save_weights(ws, base);
    const auto back = load_weights(base);
    CHECK(back.arch.size() == ws.arch.size());
    CHECK(arch_to_string(back.arch) == arch_to_string(ws.arch));
    CHECK(back.activation.kind == ws.activation.kind);
    CHECK(back.activation.k == doctest::Approx(ws.activation.k));
    CHECK(back.scale.s == doctest::Approx(ws.scale.s));
    CHECK(back.epochs == 4);
    REQUIRE(back.tensors.size() == ws.tensors.size());
    for (std::size_t l = 0; l < ws.tensors.size(); ++l) {
        REQUIRE(back.tensors[l].size() == ws.tensors[l].size());
        for (std::size_t i = 0; i < ws.tensors[l].size(); ++i)
            CHECK(back.tensors[l][i] ==
                  static_cast<double>(static_cast<float>(ws.tensors[l][i])));
    }
    std::remove((base + ".json").c_str());
    std::remove((base + ".bin").c_str());
}

TEST_CASE("single-item evaluation is exactly right or wrong") {
    WeightStore ws;
    ws.arch = parse_arch("10fc");
    ws.input = {1, 1, 10};
    ws.activation = {ActKind::Relu, 0.3, 0.45};
    ws.scale = {201.0, 5.0};
    ws.tensors = {std::vector<double>(100, 0.0)};
    for (int i = 0; i < 10; ++i) ws.tensors[0][i * 10 + i] = 1.0;  // identity map

    Dataset one;
    one.rows = 1;
    one.cols = 10;
    one.images.assign(10, 0.0f);
    one.images[4] = 1.0f;
    one.labels = {4};
    CHECK(evaluate_ann(ws, one, ws.activation) == 0.0);
    one.labels = {5};
    CHECK(evaluate_ann(ws, one, ws.activation) == 1.0);
}

TEST_CASE("relu forward is monotone in any input pixel for nonnegative weights") {
    const auto arch = parse_arch("2c3-2s-4fc");
    const ActivationKind kind{ActKind::Relu, 0.3, 0.45};
    auto ws = init_weights(arch, {1, 6, 6}, kind, {201.0, 5.0}, 31);
    for (auto& layer : ws.tensors)
        for (auto& w : layer) w = std::fabs(w);

    std::vector<double> x(36, 0.2);
    const auto base = forward(ws, x, kind).back().y;
    for (int pixel = 0; pixel < 36; pixel += 7) {
        auto bumped = x;
        bumped[pixel] += 0.1;
        const auto y = forward(ws, bumped, kind).back().y;
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] >= base[i] - 1e-12);
    }
}

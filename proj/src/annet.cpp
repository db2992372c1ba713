#include "nsp/annet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "nsp/rng.hpp"

namespace nsp {

std::vector<LayerSpec> parse_arch(const std::string& text) {
    std::vector<LayerSpec> arch;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t dash = text.find('-', pos);
        if (dash == std::string::npos) dash = text.size();
        const std::string token = text.substr(pos, dash - pos);
        pos = dash + 1;
        if (token.empty()) continue;
        LayerSpec spec;
        if (token.size() > 2 && token.compare(token.size() - 2, 2, "fc") == 0) {
            spec.kind = LayerSpec::Kind::Dense;
            spec.out_units = std::stoi(token.substr(0, token.size() - 2));
        } else if (token.back() == 's') {
            spec.kind = LayerSpec::Kind::AvgPool;
            spec.stride = std::stoi(token.substr(0, token.size() - 1));
        } else {
            const std::size_t c = token.find('c');
            if (c == std::string::npos || c == 0 || c + 1 >= token.size())
                throw std::invalid_argument("parse_arch: bad layer token '" + token + "'");
            spec.kind = LayerSpec::Kind::Conv;
            spec.out_maps = std::stoi(token.substr(0, c));
            spec.kernel = std::stoi(token.substr(c + 1));
        }
        arch.push_back(spec);
    }
    if (arch.empty()) throw std::invalid_argument("parse_arch: empty architecture");
    return arch;
}

std::string arch_to_string(const std::vector<LayerSpec>& arch) {
    std::string out;
    for (const auto& spec : arch) {
        if (!out.empty()) out += "-";
        switch (spec.kind) {
            case LayerSpec::Kind::Conv:
                out += std::to_string(spec.out_maps) + "c" + std::to_string(spec.kernel);
                break;
            case LayerSpec::Kind::AvgPool:
                out += std::to_string(spec.stride) + "s";
                break;
            case LayerSpec::Kind::Dense:
                out += std::to_string(spec.out_units) + "fc";
                break;
        }
    }
    return out;
}

std::vector<Shape> layer_shapes(const std::vector<LayerSpec>& arch, Shape input) {
    std::vector<Shape> shapes;
    Shape cur = input;
    for (const auto& spec : arch) {
        switch (spec.kind) {
            case LayerSpec::Kind::Conv: {
                if (spec.kernel <= 0 || spec.kernel > cur.h || spec.kernel > cur.w)
                    throw std::invalid_argument("layer_shapes: conv kernel larger than input");
                cur = {spec.out_maps, cur.h - spec.kernel + 1, cur.w - spec.kernel + 1};
                break;
            }
            case LayerSpec::Kind::AvgPool: {
                if (spec.stride <= 0 || cur.h % spec.stride != 0 || cur.w % spec.stride != 0)
                    throw std::invalid_argument("layer_shapes: pool stride must divide input side");
                cur = {cur.c, cur.h / spec.stride, cur.w / spec.stride};
                break;
            }
            case LayerSpec::Kind::Dense: {
                cur = {spec.out_units, 1, 1};
                break;
            }
        }
        shapes.push_back(cur);
    }
    return shapes;
}

namespace {

std::size_t tensor_size(const LayerSpec& spec, const Shape& in) {
    switch (spec.kind) {
        case LayerSpec::Kind::Conv:
            return static_cast<std::size_t>(spec.out_maps) * in.c * spec.kernel * spec.kernel;
        case LayerSpec::Kind::Dense:
            return static_cast<std::size_t>(spec.out_units) * in.size();
        case LayerSpec::Kind::AvgPool:
            return 0;
    }
    return 0;
}

}  // namespace

void WeightStore::validate() const {
    const auto shapes = layer_shapes(arch, input);
    if (tensors.size() != arch.size())
        throw std::invalid_argument("WeightStore: tensor count mismatch with architecture");
    Shape in = input;
    for (std::size_t l = 0; l < arch.size(); ++l) {
        if (tensors[l].size() != tensor_size(arch[l], in))
            throw std::invalid_argument("WeightStore: tensor shape mismatch at layer " +
                                        std::to_string(l));
        for (double v : tensors[l])
            if (!std::isfinite(v))
                throw std::invalid_argument("WeightStore: non-finite weight at layer " +
                                            std::to_string(l));
        in = shapes[l];
    }
}

WeightStore init_weights(const std::vector<LayerSpec>& arch, Shape input,
                         const ActivationKind& activation, const CombinedScale& scale,
                         std::uint64_t seed) {
    WeightStore ws;
    ws.arch = arch;
    ws.input = input;
    ws.activation = activation;
    ws.scale = scale;
    ws.seed = seed;
    const auto shapes = layer_shapes(arch, input);
    Rng rng(derive_seed(seed, 0xa11ce));
    Shape in = input;
    for (std::size_t l = 0; l < arch.size(); ++l) {
        const std::size_t n = tensor_size(arch[l], in);
        std::vector<double> w(n, 0.0);
        if (n > 0) {
            double fan_in = 0.0, fan_out = 0.0;
            if (arch[l].kind == LayerSpec::Kind::Conv) {
                fan_in = static_cast<double>(in.c) * arch[l].kernel * arch[l].kernel;
                fan_out = static_cast<double>(arch[l].out_maps) * arch[l].kernel * arch[l].kernel;
            } else {
                fan_in = in.size();
                fan_out = arch[l].out_units;
            }
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> uniform(-bound, bound);
            for (double& v : w) v = uniform(rng);
        }
        ws.tensors.push_back(std::move(w));
        in = shapes[l];
    }
    return ws;
}

std::vector<double> encode_input(const float* pixels, int n, double rate_scale_hz,
                                 double tau_syn_ms) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i)
        x[i] = static_cast<double>(pixels[i]) * rate_scale_hz * tau_syn_ms / 1000.0;
    return x;
}

namespace {

void conv_forward(const LayerSpec& spec, const Shape& in, const Shape& out,
                  const std::vector<double>& w, const std::vector<double>& x,
                  std::vector<double>& net, std::vector<double>* var) {
    const int k = spec.kernel;
    for (int oc = 0; oc < out.c; ++oc) {
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                double acc = 0.0, vacc = 0.0;
                for (int ic = 0; ic < in.c; ++ic) {
                    const double* xin = x.data() + (static_cast<std::size_t>(ic) * in.h + oy) * in.w + ox;
                    const double* wrow =
                        w.data() + ((static_cast<std::size_t>(oc) * in.c + ic) * k) * k;
                    for (int ky = 0; ky < k; ++ky) {
                        const double* xr = xin + static_cast<std::size_t>(ky) * in.w;
                        const double* wr = wrow + static_cast<std::size_t>(ky) * k;
                        for (int kx = 0; kx < k; ++kx) {
                            acc += wr[kx] * xr[kx];
                            if (var) vacc += 0.5 * wr[kx] * wr[kx] * xr[kx];
                        }
                    }
                }
                const std::size_t o = (static_cast<std::size_t>(oc) * out.h + oy) * out.w + ox;
                net[o] = acc;
                if (var) (*var)[o] = vacc;
            }
        }
    }
}

void pool_forward(const LayerSpec& spec, const Shape& in, const Shape& out,
                  const std::vector<double>& x, std::vector<double>& net,
                  std::vector<double>* var) {
    const int s = spec.stride;
    const double w = 1.0 / (static_cast<double>(s) * s);
    for (int c = 0; c < out.c; ++c) {
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                double acc = 0.0;
                for (int dy = 0; dy < s; ++dy)
                    for (int dx = 0; dx < s; ++dx)
                        acc += x[(static_cast<std::size_t>(c) * in.h + oy * s + dy) * in.w +
                                 ox * s + dx];
                const std::size_t o = (static_cast<std::size_t>(c) * out.h + oy) * out.w + ox;
                net[o] = w * acc;
                if (var) (*var)[o] = 0.5 * w * w * acc;
            }
        }
    }
}

void dense_forward(const Shape& in, const Shape& out, const std::vector<double>& w,
                   const std::vector<double>& x, std::vector<double>& net,
                   std::vector<double>* var) {
    const int n_in = in.size();
    for (int o = 0; o < out.c; ++o) {
        double acc = 0.0, vacc = 0.0;
        const double* wrow = w.data() + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) {
            acc += wrow[i] * x[i];
            if (var) vacc += 0.5 * wrow[i] * wrow[i] * x[i];
        }
        net[o] = acc;
        if (var) (*var)[o] = vacc;
    }
}

}  // namespace

std::vector<DualSignal> forward(const WeightStore& ws, const std::vector<double>& input,
                                const ActivationKind& kind) {
    const auto shapes = layer_shapes(ws.arch, ws.input);
    if (static_cast<int>(input.size()) != ws.input.size())
        throw std::invalid_argument("forward: input size mismatch");
    const bool want_var = kind.kind == ActKind::NoisySoftplus;

    std::vector<DualSignal> duals(ws.arch.size());
    const std::vector<double>* x = &input;
    Shape in = ws.input;
    for (std::size_t l = 0; l < ws.arch.size(); ++l) {
        const Shape out = shapes[l];
        DualSignal& d = duals[l];
        d.net.assign(out.size(), 0.0);
        d.var.assign(want_var ? out.size() : 0, 0.0);
        std::vector<double>* var = want_var ? &d.var : nullptr;
        switch (ws.arch[l].kind) {
            case LayerSpec::Kind::Conv:
                conv_forward(ws.arch[l], in, out, ws.tensors[l], *x, d.net, var);
                break;
            case LayerSpec::Kind::AvgPool:
                pool_forward(ws.arch[l], in, out, *x, d.net, var);
                break;
            case LayerSpec::Kind::Dense:
                dense_forward(in, out, ws.tensors[l], *x, d.net, var);
                break;
        }
        d.y.resize(out.size());
        for (int i = 0; i < out.size(); ++i) {
            const double sigma = want_var ? std::sqrt(std::max(0.0, d.var[i])) : 0.0;
            d.y[i] = combined_forward(kind, d.net[i], sigma, ws.scale);
        }
        x = &d.y;
        in = out;
    }
    return duals;
}

namespace {

// delta is dLoss/dy of this layer's output; returns dLoss/dx and fills grad
void conv_backward(const LayerSpec& spec, const Shape& in, const Shape& out,
                   const std::vector<double>& w, const std::vector<double>& x,
                   const std::vector<double>& dnet, std::vector<double>& grad,
                   std::vector<double>& dx) {
    const int k = spec.kernel;
    dx.assign(in.size(), 0.0);
    for (int oc = 0; oc < out.c; ++oc) {
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                const double d = dnet[(static_cast<std::size_t>(oc) * out.h + oy) * out.w + ox];
                if (d == 0.0) continue;
                for (int ic = 0; ic < in.c; ++ic) {
                    const std::size_t xbase = (static_cast<std::size_t>(ic) * in.h + oy) * in.w + ox;
                    const std::size_t wbase = ((static_cast<std::size_t>(oc) * in.c + ic) * k) * k;
                    for (int ky = 0; ky < k; ++ky) {
                        for (int kx = 0; kx < k; ++kx) {
                            const std::size_t xi = xbase + static_cast<std::size_t>(ky) * in.w + kx;
                            grad[wbase + static_cast<std::size_t>(ky) * k + kx] += d * x[xi];
                            dx[xi] += d * w[wbase + static_cast<std::size_t>(ky) * k + kx];
                        }
                    }
                }
            }
        }
    }
}

void pool_backward(const LayerSpec& spec, const Shape& in, const Shape& out,
                   const std::vector<double>& dnet, std::vector<double>& dx) {
    const int s = spec.stride;
    const double w = 1.0 / (static_cast<double>(s) * s);
    dx.assign(in.size(), 0.0);
    for (int c = 0; c < out.c; ++c)
        for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) {
                const double d = w * dnet[(static_cast<std::size_t>(c) * out.h + oy) * out.w + ox];
                for (int dy = 0; dy < s; ++dy)
                    for (int dxp = 0; dxp < s; ++dxp)
                        dx[(static_cast<std::size_t>(c) * in.h + oy * s + dy) * in.w + ox * s +
                           dxp] += d;
            }
}

void dense_backward(const Shape& in, const Shape& out, const std::vector<double>& w,
                    const std::vector<double>& x, const std::vector<double>& dnet,
                    std::vector<double>& grad, std::vector<double>& dx) {
    const int n_in = in.size();
    dx.assign(n_in, 0.0);
    for (int o = 0; o < out.c; ++o) {
        const double d = dnet[o];
        if (d == 0.0) continue;
        const std::size_t base = static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) {
            grad[base + i] += d * x[i];
            dx[i] += d * w[base + i];
        }
    }
}

}  // namespace

std::vector<std::vector<double>> backward(const WeightStore& ws,
                                          const std::vector<double>& input,
                                          const std::vector<DualSignal>& duals,
                                          const ActivationKind& kind,
                                          const std::vector<double>& target) {
    const auto shapes = layer_shapes(ws.arch, ws.input);
    const std::size_t top = ws.arch.size() - 1;
    if (duals.size() != ws.arch.size())
        throw std::invalid_argument("backward: forward pass layer count mismatch");
    if (target.size() != duals[top].y.size())
        throw std::invalid_argument("backward: target size mismatch");
    const bool want_var = kind.kind == ActKind::NoisySoftplus;

    std::vector<std::vector<double>> grads(ws.arch.size());
    for (std::size_t l = 0; l < ws.arch.size(); ++l) grads[l].assign(ws.tensors[l].size(), 0.0);

    // dLoss/dy at the top of 1/2 sum (y - t)^2
    std::vector<double> dy(duals[top].y.size());
    for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = duals[top].y[i] - target[i];

    for (std::size_t li = ws.arch.size(); li-- > 0;) {
        const Shape out = shapes[li];
        const Shape in = li == 0 ? ws.input : shapes[li - 1];
        const std::vector<double>& x = li == 0 ? input : duals[li - 1].y;

        // dy -> dnet through the combined activation; sigma channel constant
        std::vector<double> dnet(out.size());
        for (int i = 0; i < out.size(); ++i) {
            const double sigma =
                want_var ? std::sqrt(std::max(0.0, duals[li].var[i])) : 0.0;
            dnet[i] = dy[i] * combined_grad(kind, duals[li].net[i], sigma, ws.scale);
        }

        std::vector<double> dx;
        switch (ws.arch[li].kind) {
            case LayerSpec::Kind::Conv:
                conv_backward(ws.arch[li], in, out, ws.tensors[li], x, dnet, grads[li], dx);
                break;
            case LayerSpec::Kind::AvgPool:
                pool_backward(ws.arch[li], in, out, dnet, dx);
                break;
            case LayerSpec::Kind::Dense:
                dense_backward(in, out, ws.tensors[li], x, dnet, grads[li], dx);
                break;
        }
        dy = std::move(dx);
    }
    return grads;
}

namespace {

TrainResult run_sgd(WeightStore ws, const Dataset& data, const TrainConfig& cfg,
                    int epoch_offset) {
    if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
    const auto targets = encode_labels(data.labels, cfg.label_offset);
    const auto shapes = layer_shapes(ws.arch, ws.input);
    const int n_classes = shapes.back().size();
    const int n_pixels = ws.input.size();

    TrainResult result;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, 0x5affe, static_cast<std::uint64_t>(epoch + epoch_offset)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const double lr = cfg.lr0 * std::pow(cfg.lr_decay, epoch + epoch_offset);

        const std::size_t n_batches = (data.size() + cfg.batch_size - 1) / cfg.batch_size;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t begin = b * cfg.batch_size;
            const std::size_t end = std::min(begin + cfg.batch_size, data.size());

            std::vector<std::vector<double>> acc(ws.arch.size());
            for (std::size_t l = 0; l < ws.arch.size(); ++l)
                acc[l].assign(ws.tensors[l].size(), 0.0);
            double batch_loss = 0.0;

            for (std::size_t j = begin; j < end; ++j) {
                const std::size_t idx = order[j];
                const auto x = encode_input(data.image(idx), n_pixels, cfg.rate_scale_hz,
                                            cfg.scale.tau_syn);
                const auto duals = forward(ws, x, cfg.activation);
                std::vector<double> target(n_classes);
                for (int c = 0; c < n_classes; ++c)
                    target[c] = targets[idx * n_classes + c];
                const auto& y = duals.back().y;
                for (int c = 0; c < n_classes; ++c)
                    batch_loss += 0.5 * (y[c] - target[c]) * (y[c] - target[c]);
                auto grads = backward(ws, x, duals, cfg.activation, target);
                for (std::size_t l = 0; l < grads.size(); ++l)
                    for (std::size_t i = 0; i < grads[l].size(); ++i) acc[l][i] += grads[l][i];
            }

            const double inv_batch = 1.0 / static_cast<double>(end - begin);
            batch_loss *= inv_batch;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch) + " batch " + std::to_string(b));
            for (std::size_t l = 0; l < ws.tensors.size(); ++l)
                for (std::size_t i = 0; i < ws.tensors[l].size(); ++i)
                    ws.tensors[l][i] -= lr * inv_batch * acc[l][i];

            result.loss_curve.push_back({epoch + epoch_offset, static_cast<int>(b), batch_loss});
        }
        ws.epochs = epoch + epoch_offset + 1;
    }
    result.weights = std::move(ws);
    return result;
}

}  // namespace

TrainResult train(const Dataset& data, const std::vector<LayerSpec>& arch,
                  const TrainConfig& cfg) {
    Shape input{1, data.rows, data.cols};
    WeightStore ws = init_weights(arch, input, cfg.activation, cfg.scale, cfg.seed);
    ws.provenance = "train";
    return run_sgd(std::move(ws), data, cfg, 0);
}

TrainResult fine_tune(const WeightStore& ws, const Dataset& data, TrainConfig cfg) {
    cfg.activation.kind = ActKind::NoisySoftplus;
    WeightStore tuned = ws;
    tuned.activation = cfg.activation;
    tuned.scale = cfg.scale;
    tuned.provenance = ws.provenance + "+finetune";
    return run_sgd(std::move(tuned), data, cfg, ws.epochs);
}

double evaluate_ann(const WeightStore& ws, const Dataset& data, const ActivationKind& kind,
                    double rate_scale_hz) {
    ws.validate();
    const int n_pixels = ws.input.size();
    std::size_t errors = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = encode_input(data.image(i), n_pixels, rate_scale_hz, ws.scale.tau_syn);
        const auto duals = forward(ws, x, kind);
        const auto& y = duals.back().y;
        const int pred = static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
        if (pred != data.labels[i]) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(data.size());
}

void save_weights(const WeightStore& ws, const std::string& base_path) {
    ws.validate();
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["architecture"] = arch_to_string(ws.arch);
    manifest["input"] = {ws.input.c, ws.input.h, ws.input.w};
    manifest["activation"] = ws.activation.kind == ActKind::NoisySoftplus ? "noisy-softplus"
                             : ws.activation.kind == ActKind::Relu        ? "relu"
                                                                          : "softplus";
    manifest["activation_k"] = ws.activation.k;
    manifest["activation_fixed_sigma"] = ws.activation.fixed_sigma;
    manifest["calibration"] = {{"s", ws.scale.s}, {"tau_syn", ws.scale.tau_syn}};
    manifest["seed"] = ws.seed;
    manifest["epochs"] = ws.epochs;
    manifest["provenance"] = ws.provenance;

    const auto all_shapes = layer_shapes(ws.arch, ws.input);
    nlohmann::json shapes = nlohmann::json::array();
    nlohmann::json offsets = nlohmann::json::array();
    std::size_t offset = 0;
    Shape in = ws.input;
    for (std::size_t l = 0; l < ws.arch.size(); ++l) {
        nlohmann::json shape = nlohmann::json::array();
        if (ws.arch[l].kind == LayerSpec::Kind::Conv)
            shape = {ws.arch[l].out_maps, in.c, ws.arch[l].kernel, ws.arch[l].kernel};
        else if (ws.arch[l].kind == LayerSpec::Kind::Dense)
            shape = {ws.arch[l].out_units, in.size()};
        shapes.push_back(shape);
        offsets.push_back(offset);
        offset += ws.tensors[l].size() * sizeof(float);
        in = all_shapes[l];
    }
    manifest["shapes"] = shapes;
    manifest["byte_offsets"] = offsets;
    manifest["blob_bytes"] = offset;

    std::ofstream mf(base_path + ".json");
    if (!mf) throw std::runtime_error("cannot open " + base_path + ".json");
    mf << manifest.dump(2) << "\n";

    std::ofstream blob(base_path + ".bin", std::ios::binary);
    if (!blob) throw std::runtime_error("cannot open " + base_path + ".bin");
    for (const auto& tensor : ws.tensors) {
        for (double v : tensor) {
            const float f = static_cast<float>(v);
            blob.write(reinterpret_cast<const char*>(&f), sizeof(float));
        }
    }
}

WeightStore load_weights(const std::string& base_path) {
    std::ifstream mf(base_path + ".json");
    if (!mf) throw std::runtime_error("cannot open " + base_path + ".json");
    nlohmann::json manifest;
    mf >> manifest;

    WeightStore ws;
    ws.arch = parse_arch(manifest.at("architecture").get<std::string>());
    const auto input = manifest.at("input");
    ws.input = {input[0].get<int>(), input[1].get<int>(), input[2].get<int>()};
    const std::string act = manifest.at("activation").get<std::string>();
    ws.activation.kind = act == "noisy-softplus" ? ActKind::NoisySoftplus
                         : act == "relu"         ? ActKind::Relu
                                                 : ActKind::Softplus;
    ws.activation.k = manifest.value("activation_k", 0.3);
    ws.activation.fixed_sigma = manifest.value("activation_fixed_sigma", 0.45);
    ws.scale.s = manifest.at("calibration").at("s").get<double>();
    ws.scale.tau_syn = manifest.at("calibration").at("tau_syn").get<double>();
    ws.seed = manifest.value("seed", 0ULL);
    ws.epochs = manifest.value("epochs", 0);
    ws.provenance = manifest.value("provenance", "");

    std::ifstream blob(base_path + ".bin", std::ios::binary);
    if (!blob) throw std::runtime_error("cannot open " + base_path + ".bin");
    const auto shapes = layer_shapes(ws.arch, ws.input);
    Shape in = ws.input;
    for (std::size_t l = 0; l < ws.arch.size(); ++l) {
        const std::size_t n = tensor_size(ws.arch[l], in);
        std::vector<double> tensor(n);
        for (std::size_t i = 0; i < n; ++i) {
            float f = 0.0f;
            blob.read(reinterpret_cast<char*>(&f), sizeof(float));
            if (!blob) throw std::runtime_error("weights blob truncated: " + base_path + ".bin");
            tensor[i] = f;
        }
        ws.tensors.push_back(std::move(tensor));
        in = shapes[l];
    }
    ws.validate();
    return ws;
}

void write_loss_csv(const std::vector<LossPoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "epoch,batch,loss\n";
    char buf[96];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.9g\n", p.epoch, p.batch, p.loss);
        out << buf;
    }
}

}  // namespace nsp

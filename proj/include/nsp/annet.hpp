#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsp/activations.hpp"
#include "nsp/dataio.hpp"

namespace nsp {

struct LayerSpec {
    enum class Kind { Conv, AvgPool, Dense };
    Kind kind = Kind::Dense;
    int out_maps = 0;  // conv
    int kernel = 0;    // conv
    int stride = 0;    // avgpool
    int out_units = 0; // dense

    bool trainable() const { return kind != Kind::AvgPool; }
};

/// Parse an architecture string such as "6c5-2s-12c5-2s-10fc".
std::vector<LayerSpec> parse_arch(const std::string& text);
std::string arch_to_string(const std::vector<LayerSpec>& arch);

struct Shape {
    int c = 0, h = 0, w = 0;
    int size() const { return c * h * w; }
};

/// Shape after each layer for a given input shape; throws on inconsistent
/// geometry (kernel larger than input, stride not dividing the side, ...).
std::vector<Shape> layer_shapes(const std::vector<LayerSpec>& arch, Shape input);

/// Architecture description plus trained weight tensors; shared by the
/// ANN forward pass and the spiking network builder.
struct WeightStore {
    std::vector<LayerSpec> arch;
    Shape input{1, 28, 28};
    ActivationKind activation;
    CombinedScale scale;
    std::uint64_t seed = 0;
    int epochs = 0;
    std::string provenance = "init";
    // conv: out_maps x in_maps x k x k; dense: out x in; empty for avgpool
    std::vector<std::vector<double>> tensors;

    void validate() const;  // shape consistency + finiteness
};

/// Seeded uniform init in +-sqrt(6 / (fan_in + fan_out)), no biases anywhere.
WeightStore init_weights(const std::vector<LayerSpec>& arch, Shape input,
                         const ActivationKind& activation, const CombinedScale& scale,
                         std::uint64_t seed);

/// Manifest JSON (<base>.json) + raw little-endian float32 blob (<base>.bin).
void save_weights(const WeightStore& ws, const std::string& base_path);
WeightStore load_weights(const std::string& base_path);

/// Per-unit weighted-sum mean, its variance and the activation output.
struct DualSignal {
    std::vector<double> net;
    std::vector<double> var;  // sigma^2 per unit; filled for noisy-softplus
    std::vector<double> y;
};

/// Dual-channel forward pass: net = W x, var = (1/2 W*W) x, y = combined
/// activation of (net, sqrt(var)). Input x is the rate-coded image,
/// x_i = lambda_i * tau_syn. Returns one DualSignal per layer.
std::vector<DualSignal> forward(const WeightStore& ws, const std::vector<double>& input,
                                const ActivationKind& kind);

/// Rate-coded input vector for an image: pixel * rate_scale (Hz) * tau_syn.
std::vector<double> encode_input(const float* pixels, int n, double rate_scale_hz,
                                 double tau_syn_ms);

/// Gradients of 1/2 sum (y_top - target)^2 w.r.t. every trainable weight;
/// the variance channel is treated as constant during differentiation.
std::vector<std::vector<double>> backward(const WeightStore& ws,
                                          const std::vector<double>& input,
                                          const std::vector<DualSignal>& duals,
                                          const ActivationKind& kind,
                                          const std::vector<double>& target);

struct TrainConfig {
    int epochs = 5;
    int batch_size = 50;
    double lr0 = 0.1;
    double lr_decay = 0.9;
    std::uint64_t seed = 1;
    double label_offset = 0.0;
    ActivationKind activation;
    CombinedScale scale;
    double rate_scale_hz = 100.0;  // input pixel -> Poisson rate scaling
};

struct LossPoint {
    int epoch = 0;
    int batch = 0;
    double loss = 0.0;
};

struct TrainResult {
    WeightStore weights;
    std::vector<LossPoint> loss_curve;
};

/// Minibatch SGD with decaying learning rate lr0 * decay^epoch;
/// deterministic for a fixed seed. Throws std::runtime_error when the loss
/// turns non-finite.
TrainResult train(const Dataset& data, const std::vector<LayerSpec>& arch,
                  const TrainConfig& cfg);

/// One-epoch (by default) continuation with noisy-softplus activations and
/// offset labels, starting from previously trained weights.
TrainResult fine_tune(const WeightStore& ws, const Dataset& data, TrainConfig cfg);

/// Classification error rate in [0, 1]: argmax of top-layer y vs label.
double evaluate_ann(const WeightStore& ws, const Dataset& data, const ActivationKind& kind,
                    double rate_scale_hz = 100.0);

void write_loss_csv(const std::vector<LossPoint>& curve, const std::string& path);

}  // namespace nsp

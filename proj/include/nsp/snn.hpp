#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsp/annet.hpp"
#include "nsp/lif.hpp"

namespace nsp {

/// LIF network unrolled from a WeightStore: conv/pool weight sharing is
/// expanded to an explicit connection list, weights used as-is (nA).
/// Neuron ids: [0, n_input) are the Poisson input sources, then each layer's
/// neurons consecutively.
struct SpikingNetwork {
    LifParams params;
    int n_input = 0;
    int n_neurons = 0;                  // simulated LIF neurons (inputs excluded)
    std::vector<int> layer_offsets;     // first neuron id of each layer (size = layers + 1)
    // CSR fan-out over all ids (inputs + neurons)
    std::vector<std::size_t> fanout_begin;  // size n_input + n_neurons + 1
    std::vector<int> post;
    std::vector<double> weight;

    int fanout_count(int id) const {
        return static_cast<int>(fanout_begin[id + 1] - fanout_begin[id]);
    }
};

/// Unroll a trained WeightStore into a spiking network. Pooling becomes
/// fixed 1/(stride^2) connections, convolution a valid (non-padded) sweep,
/// dense layers full bipartite connections.
SpikingNetwork build_snn(const WeightStore& ws, const LifParams& params);

struct InferenceResult {
    std::vector<long long> class_counts;  // output-layer spike counts
    int predicted = -1;                   // argmax, ties broken by lowest index
    bool degenerate = false;              // all-zero output counts
    std::vector<double> checkpoints_ms;
    std::vector<std::vector<long long>> checkpoint_counts;  // per checkpoint, per class
    long long synaptic_events = 0;        // sum over spikes of emitting fan-out
    std::vector<double> output_rates_hz;  // class spike counts / duration
    std::vector<long long> neuron_spike_counts;  // per simulated neuron
};

/// Poisson-encode an image (pixel * rate_scale Hz) and run clock-driven
/// inference for `duration` ms at step dt. Spike propagation is delayed by
/// one step between layers. Deterministic per seed.
InferenceResult infer(const SpikingNetwork& net, const float* image, double duration,
                      double dt, double rate_scale_hz, std::uint64_t seed,
                      const std::vector<double>& checkpoints_ms = {});

struct SnnEvaluation {
    double error_rate = 0.0;
    std::vector<double> checkpoints_ms;
    std::vector<double> accuracy_at_checkpoint;
    std::vector<int> predictions;
    long long total_synaptic_events = 0;
};

/// Per-image independent simulations (seed derived from image index, so the
/// result does not depend on evaluation order or thread count).
SnnEvaluation evaluate_snn(const SpikingNetwork& net, const Dataset& data, double duration,
                           double dt, std::uint64_t seed,
                           const std::vector<double>& checkpoints_ms = {}, int threads = 1);

/// Predicted-vs-measured firing rates for one trained convolution kernel
/// applied to Poisson-encoded images, per activation kind.
struct ConvRatesResult {
    double dist_noisy_softplus = 0.0;  // Euclidean distance, Hz
    double dist_relu = 0.0;
    double dist_softplus = 0.0;
    std::vector<double> measured_hz;            // concatenated over images
    std::vector<double> predicted_ns_hz;
    std::vector<double> predicted_relu_hz;
    std::vector<double> predicted_softplus_hz;
};

/// Takes the first feature map of the first conv layer in `ws`.
ConvRatesResult convolve_rates_experiment(const WeightStore& ws, const Dataset& images,
                                          std::size_t n_images, double duration, double dt,
                                          double rate_scale_hz, std::uint64_t seed,
                                          double softplus_sigma = 0.45);

struct EnergyReport {
    double joules = 0.0;
    double watts = 0.0;
    double events_per_sec = 0.0;
};

/// E = events/s * T * E_syn.
EnergyReport energy_from_event_rate(double events_per_sec, double duration_s, double e_syn_nj);

/// E = sum_j lambda_j N_j * T * E_syn; lambda in Hz, N the fan-out counts.
EnergyReport energy_from_rates(const std::vector<double>& rates_hz,
                               const std::vector<int>& fanouts, double duration_s,
                               double e_syn_nj);

void write_accuracy_csv(const SnnEvaluation& eval, const std::string& path);

}  // namespace nsp

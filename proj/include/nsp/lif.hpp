#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nsp {

// Unit conventions project-wide: mV, ms, nA, nF. With these,
// r_m = tau_m / c_m comes out in MOhm and r_m * I in mV.

/// Biophysical constants of the current-based LIF neuron.
/// Defaults are the reference parameter set used throughout.
struct LifParams {
    double c_m = 0.25;        // nF
    double tau_m = 20.0;      // ms
    double tau_refrac = 1.0;  // ms
    double v_reset = -65.0;   // mV
    double v_rest = -65.0;    // mV
    double v_thresh = -50.0;  // mV
    double i_offset = 0.1;    // nA
    double tau_syn = 5.0;     // ms

    double r_m() const { return tau_m / c_m; }  // MOhm

    /// Minimum constant current that can reach threshold, nA.
    double rheobase() const { return (v_thresh - v_rest) / r_m(); }

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;
};

struct NeuronState {
    double v = -65.0;              // mV
    double i_syn_exc = 0.0;        // nA
    double i_syn_inh = 0.0;        // nA
    double refrac_remaining = 0.0; // ms
    std::optional<double> last_spike;  // ms
};

/// Ordered spike times of one source or neuron.
struct SpikeTrain {
    int source_id = 0;
    std::vector<double> times;  // ms, strictly increasing
};

/// Time series of injected current.
struct CurrentTrace {
    double dt = 0.1;             // ms
    std::vector<double> samples; // nA
};

/// Advance one neuron by dt using exact exponential integration of the
/// membrane equation with the total current held constant over the step.
/// Synaptic currents decay by exp(-dt/tau_syn). During refractoriness the
/// membrane is clamped at v_reset and synaptic input is not integrated,
/// while synaptic state still decays. Spikes are registered at step
/// boundaries. Returns true when the neuron fires in this step.
/// Throws std::invalid_argument on non-finite input current.
bool lif_step(NeuronState& state, const LifParams& params, double i_ext, double dt);

struct WeightedInput {
    double weight = 0.0;  // nA increment added to i_syn per arriving spike
    SpikeTrain train;
};

struct SimResult {
    SpikeTrain spikes;
    std::vector<double> v_trace;      // filled when record_state
    std::vector<double> i_syn_trace;  // nA, total synaptic current per step
    double duration = 0.0;            // ms
    double rate_hz() const {
        return duration > 0.0 ? 1000.0 * static_cast<double>(spikes.times.size()) / duration : 0.0;
    }
};

/// Simulate one neuron driven by a current trace (resampled to dt by
/// sample-and-hold if trace dt is a multiple of dt).
SimResult simulate_neuron(const LifParams& params, const CurrentTrace& drive,
                          double duration, double dt, bool record_state = false);

/// Simulate one neuron driven by weighted input spike trains; each arriving
/// spike adds `weight` nA to the synaptic current, which then decays
/// exponentially with tau_syn.
/// Throws std::invalid_argument when an input spike lies outside [0, duration].
SimResult simulate_neuron(const LifParams& params, const std::vector<WeightedInput>& inputs,
                          double duration, double dt, bool record_state = false);

/// CSV export, columns: time_ms,value.
void write_trace_csv(const std::vector<double>& values, double dt, const std::string& path);
void write_spikes_csv(const SpikeTrain& train, const std::string& path);

}  // namespace nsp

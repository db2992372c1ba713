#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsp/lif.hpp"

namespace nsp {

/// Gaussian current drawn every sample_dt and held constant in between.
struct NoisyCurrentSpec {
    double mean = 0.0;      // nA (m_I)
    double std = 0.0;       // nA (s_I)
    double sample_dt = 1.0; // ms
    std::uint64_t seed = 0;
};

/// Ensemble of Poisson sources projecting onto one neuron.
struct PoissonEnsembleSpec {
    std::vector<double> weights; // nA per source
    std::vector<double> rates;   // Hz per source
    double duration = 0.0;       // ms
    std::uint64_t seed = 0;

    std::size_t count() const { return weights.size(); }
};

struct CurrentStats {
    double mean = 0.0;     // nA
    double variance = 0.0; // nA^2
};

/// Sample-and-hold Gaussian current trace at resolution sim_dt.
/// Throws std::invalid_argument when sample_dt is not a positive integer
/// multiple of sim_dt or std < 0.
CurrentTrace noisy_current(const NoisyCurrentSpec& spec, double duration, double sim_dt);

/// Bernoulli(rate*dt) spike generation per step; deterministic per seed.
/// Throws std::invalid_argument when rate*dt >= 1 (unrepresentable) or rate < 0.
SpikeTrain poisson_train(double rate_hz, double duration_ms, double dt_ms, std::uint64_t seed);

/// Stationary mean and variance of the synaptic current produced by the
/// ensemble: m_I = tau_syn * sum_i w_i lambda_i, s_I^2 = tau_syn/2 * sum_i w_i^2 lambda_i
/// (tau_syn in ms, weights in nA, rates converted to kHz).
CurrentStats ensemble_to_stats(const PoissonEnsembleSpec& spec, double tau_syn);

/// Inverse mapping with identical |w| across sources and an excitatory
/// fraction `split` (default half excitatory, half inhibitory); the two
/// population rates solve the resulting 2x2 linear system.
/// weight_magnitude = 0 picks |w| automatically so that the mean per-source
/// rate stays near 300 Hz (representable at 1 ms resolution) while keeping
/// rates nonnegative. Throws std::invalid_argument when no nonnegative-rate
/// solution exists, naming the violated bound.
PoissonEnsembleSpec stats_to_ensemble(double m_i, double s_i, double tau_syn, int count,
                                      double split = 0.5, double weight_magnitude = 0.0);

struct TraceDiagnostics {
    std::vector<double> hist_edges;   // size bins+1, Freedman-Diaconis rule
    std::vector<double> hist_density; // normalized so the histogram integrates to 1
    std::vector<double> autocorr;     // lag 0..max_lag steps, autocorr[0] == 1
    bool autocorr_defined = true;     // false for zero-variance traces
    std::vector<double> psd_freq_hz;
    std::vector<double> psd;          // segment-averaged periodogram
};

/// Histogram, normalized autocorrelation and periodogram of a trace.
/// Throws std::invalid_argument on an empty trace or when the trace is
/// shorter than 2*max_lag.
TraceDiagnostics trace_diagnostics(const CurrentTrace& trace, double max_lag_ms);

void write_diagnostics_csv(const TraceDiagnostics& d, const std::string& prefix);

}  // namespace nsp

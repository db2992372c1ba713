#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsp/lif.hpp"

namespace nsp {

/// Drift and noise intensity of the membrane-potential process,
/// mu in mV/ms and sigma in mV/sqrt(ms).
struct DiffusionStats {
    double mu = 0.0;
    double sigma = 0.0;
};

/// One point of a measured tuning curve.
struct TuningSample {
    double m_i = 0.0;     // nA
    double s_i = 0.0;     // nA
    double rate = 0.0;    // Hz, mean over trials
    double rate_min = 0.0;
    double rate_max = 0.0;
    int trials = 0;
};

/// Fitted Noisy Softplus parameters for a given synapse time constant.
struct Calibration {
    double k = 0.0;        // shape factor
    double s = 0.0;        // rate scale factor S, Hz per unit activation
    double tau_syn = 0.0;  // ms
    double fit_rmse = 0.0; // Hz
};

/// Firing rate (Hz) of the LIF neuron under a constant current i (nA).
/// Zero below rheobase; approaches 1000/tau_refrac for large currents.
double rate_constant_current(const LifParams& params, double i_nA);

/// (mu, sigma) from current statistics at sampling resolution dt:
/// mu = m_I / c_m, sigma = s_I * sqrt(dt) / c_m.
DiffusionStats current_stats_to_diffusion(double m_i, double s_i, double dt,
                                          const LifParams& params);

/// Mean firing rate (Hz) under Gaussian white-noise current, evaluated by
/// adaptive quadrature of the diffusion-approximation integral with the
/// integrand in erfcx form. sigma == 0 delegates to rate_constant_current.
/// Throws std::runtime_error when the quadrature fails to converge.
double siegert_rate(const LifParams& params, const DiffusionStats& stats);

enum class TuningMode { CurrentSource, PoissonEnsemble };

struct TuningConfig {
    double duration = 10000.0; // ms
    int trials = 10;
    double dt = 1.0;           // ms
    double sample_dt = 1.0;    // ms, current-source mode resolution
    int source_count = 100;    // Poisson mode
    std::uint64_t seed = 42;
};

/// Measure the firing rate of one LIF neuron over a (mean, std) grid of
/// current statistics, averaging over trials. Infeasible (m, s) pairs in
/// Poisson mode are skipped (absent from the result).
std::vector<TuningSample> measure_tuning_curve(const LifParams& params,
                                               const std::vector<double>& m_grid,
                                               const std::vector<double>& s_grid,
                                               TuningMode mode, const TuningConfig& config);

/// Fit (k, S) of S * f_ns(m, s; k) to measured rates: golden-section search
/// over k with the closed-form least-squares S at each k.
/// Requires >= 10 samples spanning >= 2 distinct s values; throws
/// std::invalid_argument on degenerate input (all rates zero).
Calibration calibrate(const std::vector<TuningSample>& samples, double tau_syn);

void write_tuning_csv(const std::vector<TuningSample>& samples, const std::string& path);
void write_calibration_json(const Calibration& calib, const std::string& path,
                            const std::string& provenance);
Calibration read_calibration_json(const std::string& path);

}  // namespace nsp

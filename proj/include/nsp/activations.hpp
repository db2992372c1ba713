#pragma once

#include "nsp/response.hpp"

namespace nsp {

enum class ActKind { NoisySoftplus, Relu, Softplus };

/// Activation selector. `k` applies to noisy-softplus and softplus;
/// `fixed_sigma` is the static noise level used by softplus.
struct ActivationKind {
    ActKind kind = ActKind::NoisySoftplus;
    double k = 0.3;
    double fixed_sigma = 0.45;
};

/// End-to-end gain of the combined activation: S (Hz per unit) times
/// tau_syn converted to seconds, so an activation value of 1 corresponds
/// to an output rate of 1/tau_syn.
struct CombinedScale {
    double s = 201.0;       // Hz per unit activation
    double tau_syn = 5.0;   // ms
    double gain() const { return s * tau_syn / 1000.0; }
};

/// k*sigma * log(1 + exp(x / (k*sigma))), computed in overflow-safe form;
/// sigma == 0 is the analytic ReLU limit max(0, x).
double noisy_softplus(double x, double sigma, double k);

/// d/dx of noisy_softplus: the logistic function of x/(k*sigma);
/// sigma == 0 gives the step function (1/2 at x == 0).
double noisy_softplus_grad(double x, double sigma, double k);

/// f(x[, sigma]) for the selected kind. Throws std::invalid_argument for a
/// negative sigma with noisy-softplus.
double activation_value(const ActivationKind& kind, double x, double sigma);
double activation_grad(const ActivationKind& kind, double x, double sigma);

/// f(x[, sigma]) * S * tau_syn, the numeric-valued form used in training.
double combined_forward(const ActivationKind& kind, double x, double sigma,
                        const CombinedScale& scale);
double combined_grad(const ActivationKind& kind, double x, double sigma,
                     const CombinedScale& scale);

/// Predicted LIF output firing rate f(x[, sigma]) * S in Hz.
double predict_rate(const ActivationKind& kind, double x, double sigma,
                    const Calibration& calib);

}  // namespace nsp

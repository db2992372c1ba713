#include "nsp/activations.hpp"

#include <cmath>
#include <stdexcept>

#include "nsp/special.hpp"

namespace nsp {

double noisy_softplus(double x, double sigma, double k) {
    if (sigma < 0.0) throw std::invalid_argument("noisy_softplus: sigma must be nonnegative");
    if (sigma == 0.0) return std::fmax(0.0, x);
    const double ks = k * sigma;
    return ks * softplus_stable(x / ks);
}

double noisy_softplus_grad(double x, double sigma, double k) {
    if (sigma < 0.0) throw std::invalid_argument("noisy_softplus_grad: sigma must be nonnegative");
    if (sigma == 0.0) return x < 0.0 ? 0.0 : (x > 0.0 ? 1.0 : 0.5);
    return logistic_stable(x / (k * sigma));
}

double activation_value(const ActivationKind& kind, double x, double sigma) {
    switch (kind.kind) {
        case ActKind::NoisySoftplus:
            return noisy_softplus(x, sigma, kind.k);
        case ActKind::Relu:
            return std::fmax(0.0, x);
        case ActKind::Softplus:
            return noisy_softplus(x, kind.fixed_sigma, kind.k);
    }
    throw std::logic_error("activation_value: unknown kind");
}

double activation_grad(const ActivationKind& kind, double x, double sigma) {
    switch (kind.kind) {
        case ActKind::NoisySoftplus:
            return noisy_softplus_grad(x, sigma, kind.k);
        case ActKind::Relu:
            return noisy_softplus_grad(x, 0.0, kind.k);
        case ActKind::Softplus:
            return noisy_softplus_grad(x, kind.fixed_sigma, kind.k);
    }
    throw std::logic_error("activation_grad: unknown kind");
}

double combined_forward(const ActivationKind& kind, double x, double sigma,
                        const CombinedScale& scale) {
    if (kind.kind == ActKind::NoisySoftplus && sigma < 0.0)
        throw std::invalid_argument("combined_forward: noisy-softplus requires sigma >= 0");
    return activation_value(kind, x, sigma) * scale.gain();
}

double combined_grad(const ActivationKind& kind, double x, double sigma,
                     const CombinedScale& scale) {
    if (kind.kind == ActKind::NoisySoftplus && sigma < 0.0)
        throw std::invalid_argument("combined_grad: noisy-softplus requires sigma >= 0");
    return activation_grad(kind, x, sigma) * scale.gain();
}

double predict_rate(const ActivationKind& kind, double x, double sigma,
                    const Calibration& calib) {
    return activation_value(kind, x, sigma) * calib.s;
}

}  // namespace nsp

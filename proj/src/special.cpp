#include "nsp/special.hpp"

#include <limits>

namespace nsp {

namespace {

// Asymptotic series erfcx(x) ~ 1/(x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - ...)
// Relative error < 1e-16 for x >= 20.
double erfcx_asymptotic(double x) {
    const double inv_sqrt_pi = 0.564189583547756286948;
    double r = 1.0 / (x * x);
    double s = 1.0 + r * (-0.5 + r * (0.75 + r * (-1.875 + r * 6.5625)));
    return inv_sqrt_pi / x * s;
}

}  // namespace

double erfcx(double x) {
    if (x >= 20.0) return erfcx_asymptotic(x);
    if (x >= 0.0) return std::exp(x * x) * std::erfc(x);
    // reflection; exp(x^2) overflows for x < -26.64
    if (x < -26.7) return std::numeric_limits<double>::infinity();
    return 2.0 * std::exp(x * x) - erfcx(-x);
}

}  // namespace nsp

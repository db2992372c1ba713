#pragma once

#include <cmath>

namespace nsp {

/// Overflow-safe softplus: log(1 + exp(z)).
/// Naive evaluation overflows for z > ~709 in double precision.
inline double softplus_stable(double z) {
    return std::fmax(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

/// Logistic function 1 / (1 + exp(-z)), safe for large |z|.
inline double logistic_stable(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

/// Scaled complementary error function erfcx(x) = exp(x^2) * erfc(x).
///
/// For x >= 0 the direct product is accurate until exp(x^2) overflows;
/// beyond that the asymptotic expansion takes over. For x < 0 the
/// reflection erfcx(x) = 2 exp(x^2) - erfcx(-x) applies and overflows to
/// +inf for x < ~-26.6, which callers must expect.
double erfcx(double x);

}  // namespace nsp

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "nsp/activations.hpp"
#include "nsp/special.hpp"

using namespace nsp;

namespace {

// extended-precision reference for kσ ln(1 + exp(x/(kσ)))
double ns_reference(double x, double sigma, double k) {
    if (sigma == 0.0) return std::fmax(0.0, x);
    const long double ks = static_cast<long double>(k) * sigma;
    const long double z = static_cast<long double>(x) / ks;
    const long double sp = z > 0 ? z + std::log1p(static_cast<long double>(::expl(-z))) : std::log1p(static_cast<long double>(::expl(z)));
    return static_cast<double>(ks * sp);
}

}  // namespace

TEST_CASE("stable softplus and logistic at extreme arguments") {
    CHECK(softplus_stable(1000.0) == doctest::Approx(1000.0));
    CHECK(softplus_stable(-1000.0) == doctest::Approx(0.0));
    CHECK(softplus_stable(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(logistic_stable(800.0) == doctest::Approx(1.0));
    CHECK(logistic_stable(-800.0) == doctest::Approx(0.0));
    CHECK(logistic_stable(0.0) == doctest::Approx(0.5));
}

TEST_CASE("erfcx against independent reference values") {
    // reference values computed with scipy.special.erfcx
    const struct { double x, ref; } table[] = {
        {-26.0, 7.657724931490568e+293},
        {-5.0, 144009798674.66104},
        {-1.0, 5.008980080762283},
        {-0.5, 1.952360489182557},
        {0.0, 1.0},
        {0.5, 0.6156903441929258},
        {1.0, 0.427583576155807},
        {5.0, 0.11070463773306861},
        {19.5, 0.028894903811938218},   // direct-product branch
        {20.5, 0.027488815151934874},   // asymptotic branch
        {100.0, 0.005641613782989433},
        {1e6, 5.641895835474742e-07},
    };
    for (const auto& row : table)
        CHECK(erfcx(row.x) == doctest::Approx(row.ref).epsilon(1e-12));
    CHECK(std::isinf(erfcx(-27.0)));  // reflection overflows past ~-26.6
}

TEST_CASE("noisy softplus closed-form values") {
    CHECK(noisy_softplus(0.0, 1.0, 0.19) == doctest::Approx(0.19 * std::log(2.0)).epsilon(1e-14));
    // sigma = 0 is the ReLU limit
    CHECK(noisy_softplus(0.5, 0.0, 0.19) == 0.5);
    CHECK(noisy_softplus(-0.5, 0.0, 0.19) == 0.0);
}

TEST_CASE("noisy softplus matches the extended-precision oracle to 1e-12") {
    for (double k : {0.19, 0.3, 1.0})
        for (double sigma : {0.1, 0.5, 1.0})
            for (double x = -2.0; x <= 2.0; x += 0.05)
                CHECK(noisy_softplus(x, sigma, k) ==
                      doctest::Approx(ns_reference(x, sigma, k)).epsilon(1e-12));
}

TEST_CASE("noisy softplus structural identities") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), us(0.05, 2.0), uk(0.05, 1.5);
    for (int i = 0; i < 500; ++i) {
        const double x = ux(rng), sigma = us(rng), k = uk(rng);
        const double f = noisy_softplus(x, sigma, k);
        // f(x, sigma; k) = k sigma softplus(x / (k sigma))
        CHECK(f == doctest::Approx(k * sigma * softplus_stable(x / (k * sigma))).epsilon(1e-12));
        // softening keeps the curve on or above the ReLU line (equality once
        // the correction underflows for x >> k sigma)
        CHECK(f - std::fmax(0.0, x) >= -1e-12 * std::fmax(1.0, std::fabs(x)));
        // positive homogeneity in (x, sigma)
        const double a = 0.5 + (i % 7);
        CHECK(noisy_softplus(a * x, a * sigma, k) == doctest::Approx(a * f).epsilon(1e-12));
        // monotone nondecreasing in x
        CHECK(noisy_softplus(x + 1e-3, sigma, k) >= f);
    }
}

TEST_CASE("gradients: closed-form points and limits") {
    CHECK(noisy_softplus_grad(0.0, 1.0, 0.19) == 0.5);
    CHECK(noisy_softplus_grad(0.0, 0.3, 0.7) == 0.5);
    CHECK(noisy_softplus_grad(1e6, 1.0, 0.19) == doctest::Approx(1.0));
    // sigma = 0 step function, 1/2 at the kink
    CHECK(noisy_softplus_grad(-0.1, 0.0, 0.3) == 0.0);
    CHECK(noisy_softplus_grad(0.1, 0.0, 0.3) == 1.0);
    CHECK(noisy_softplus_grad(0.0, 0.0, 0.3) == 0.5);
}

TEST_CASE("gradient matches central finite differences on 1000 random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), us(0.1, 2.0), uk(0.1, 1.5);
    const double h = 1e-6;
    for (int i = 0; i < 1000; ++i) {
        const double x = ux(rng), sigma = us(rng), k = uk(rng);
        const double fd =
            (noisy_softplus(x + h, sigma, k) - noisy_softplus(x - h, sigma, k)) / (2.0 * h);
        CHECK(noisy_softplus_grad(x, sigma, k) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("combined activation arithmetic") {
    const CombinedScale scale{201.0, 5.0};
    ActivationKind relu{ActKind::Relu, 0.3, 0.45};
    CHECK(combined_forward(relu, 0.5, 0.0, scale) == doctest::Approx(0.5025).epsilon(1e-12));
    // f = 1/(S tau) maps to y = 1, i.e. output rate 1/tau_syn = 200 Hz
    const double x1 = 1.0 / scale.gain();
    CHECK(combined_forward(relu, x1, 0.0, scale) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(1.0 / (scale.tau_syn / 1000.0) == doctest::Approx(200.0));

    // softplus with a static noise level reproduces noisy softplus at sigma = 0.45
    ActivationKind sp{ActKind::Softplus, 0.3, 0.45};
    ActivationKind ns{ActKind::NoisySoftplus, 0.3, 0.45};
    for (double x = -1.0; x <= 1.0; x += 0.1)
        CHECK(combined_forward(sp, x, /*ignored*/ 7.0, scale) ==
              doctest::Approx(combined_forward(ns, x, 0.45, scale)).epsilon(1e-12));
}

TEST_CASE("combined gradients") {
    const CombinedScale scale{201.0, 5.0};
    ActivationKind relu{ActKind::Relu, 0.3, 0.45};
    ActivationKind ns{ActKind::NoisySoftplus, 0.3, 0.45};
    CHECK(combined_grad(relu, 0.7, 0.0, scale) == doctest::Approx(scale.gain()).epsilon(1e-14));
    CHECK(combined_grad(ns, 0.0, 0.8, scale) == doctest::Approx(0.5 * scale.gain()).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), us(0.1, 1.5);
    const double h = 1e-6;
    for (int i = 0; i < 300; ++i) {
        const double x = ux(rng), sigma = us(rng);
        const double fd = (combined_forward(ns, x + h, sigma, scale) -
                           combined_forward(ns, x - h, sigma, scale)) / (2.0 * h);
        const double g = combined_grad(ns, x, sigma, scale);
        CHECK(g == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("negative sigma rejected for noisy softplus") {
    const CombinedScale scale{201.0, 5.0};
    ActivationKind ns{ActKind::NoisySoftplus, 0.3, 0.45};
    CHECK_THROWS_AS(combined_forward(ns, 0.1, -0.2, scale), std::invalid_argument);
}

TEST_CASE("predict_rate is S times the activation") {
    Calibration calib{0.19, 208.76, 1.0, 0.0};
    ActivationKind ns{ActKind::NoisySoftplus, 0.19, 0.45};
    for (double x = -1.5; x <= 1.5; x += 0.25)
        for (double sigma : {0.2, 0.7})
            CHECK(predict_rate(ns, x, sigma, calib) / calib.s ==
                  doctest::Approx(noisy_softplus(x, sigma, ns.k)).epsilon(1e-12));
    // deeply negative input: essentially zero rate
    CHECK(predict_rate(ns, -10.0, 0.5, calib) < 1e-6);
}

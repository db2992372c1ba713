#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "nsp/activations.hpp"
#include "nsp/response.hpp"
#include "nsp/special.hpp"

using namespace nsp;

namespace {

LifParams reference_params(double i_offset = 0.0) {
    LifParams p;
    p.i_offset = i_offset;
    return p;
}

// independent quadrature of the diffusion-approximation integral, used to
// check the library result is insensitive to the adaptive tolerance
double siegert_oracle(const LifParams& p, const DiffusionStats& st, double rel_tol) {
    const double denom = st.sigma * std::sqrt(p.tau_m);
    const double a = (0.0 - st.mu * p.tau_m) / denom;
    const double b = (p.v_thresh - p.v_rest - st.mu * p.tau_m) / denom;
    auto f = [](double u) { return std::sqrt(M_PI) * erfcx(-u); };
    // plain recursive Simpson
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fm, double fhi, double whole,
            int depth) -> double {
        const double mid = 0.5 * (lo + hi);
        const double flm = f(0.5 * (lo + mid)), frm = f(0.5 * (mid + hi));
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fm);
        const double right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fhi);
        const double delta = left + right - whole;
        if (std::fabs(delta) <= 15.0 * rel_tol * std::fabs(left + right) || depth <= 0)
            return left + right + delta / 15.0;
        return rec(lo, mid, flo, flm, fm, left, depth - 1) +
               rec(mid, hi, fm, frm, fhi, right, depth - 1);
    };
    const double mid = 0.5 * (a + b);
    const double integral =
        rec(a, b, f(a), f(mid), f(b), (b - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(b)), 50);
    return 1000.0 / (p.tau_refrac + p.tau_m * integral);
}

std::vector<TuningSample> synthetic_samples(double k, double s_scale) {
    std::vector<TuningSample> samples;
    for (double m = -0.5; m <= 1.5 + 1e-9; m += 0.2)
        for (double s : {0.2, 0.5, 1.0}) {
            TuningSample t;
            t.m_i = m;
            t.s_i = s;
            t.rate = s_scale * noisy_softplus(m, s, k);
            t.rate_min = t.rate;
            t.rate_max = t.rate;
            t.trials = 1;
            samples.push_back(t);
        }
    return samples;
}

}  // namespace

TEST_CASE("constant-current response function") {
    const auto p = reference_params();
    CHECK(rate_constant_current(p, p.rheobase()) == 0.0);
    CHECK(rate_constant_current(p, 0.1) == 0.0);
    CHECK(rate_constant_current(p, 0.3) == doctest::Approx(48.5047).epsilon(1e-4));
    // 1/t_ref asymptote
    CHECK(rate_constant_current(p, 1e9) == doctest::Approx(1000.0).epsilon(1e-4));
    // monotone in the current
    double prev = 0.0;
    for (double i = 0.2; i <= 2.0; i += 0.05) {
        const double r = rate_constant_current(p, i);
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("current statistics to diffusion statistics") {
    const auto p = reference_params();
    CHECK(current_stats_to_diffusion(0.25, 0.0, 1.0, p).sigma == 0.0);
    CHECK(current_stats_to_diffusion(0.25, 0.0, 1.0, p).mu == doctest::Approx(1.0));
    const auto a = current_stats_to_diffusion(0.3, 0.4, 1.0, p);
    const auto b = current_stats_to_diffusion(0.3, 0.4, 2.0, p);
    CHECK(b.mu == doctest::Approx(a.mu));
    CHECK(b.sigma == doctest::Approx(a.sigma * std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(current_stats_to_diffusion(0.3, 0.4, 0.0, p), std::invalid_argument);
}

TEST_CASE("diffusion rate: limits, bounds and continuity") {
    const auto p = reference_params();
    // deeply subthreshold with vanishing noise
    CHECK(siegert_rate(p, {0.25, 1e-6}) < 1e-6);
    // sigma = 0 delegates to the constant-current formula
    CHECK(siegert_rate(p, {1.2, 0.0}) == rate_constant_current(p, 1.2 * p.c_m));
    // continuity across the handoff for suprathreshold drift
    for (double m : {0.25, 0.3, 0.5}) {
        const double mu = m / p.c_m;
        CHECK(std::fabs(siegert_rate(p, {mu, 1e-4}) - rate_constant_current(p, m)) < 1.0);
    }
    // bounded by [0, 1/t_ref] everywhere
    for (double mu = -2.0; mu <= 10.0; mu += 0.5)
        for (double sigma : {0.05, 0.5, 2.0, 8.0}) {
            const double r = siegert_rate(p, {mu, sigma});
            CHECK(r >= 0.0);
            CHECK(r <= 1000.0);
        }
    CHECK_THROWS_AS(siegert_rate(p, {0.5, -1.0}), std::invalid_argument);
}

TEST_CASE("diffusion rate is monotone in drift and in subthreshold noise") {
    const auto p = reference_params();
    for (double sigma : {0.3, 1.0, 3.0}) {
        double prev = -1.0;
        for (double mu = -1.0; mu <= 3.0; mu += 0.2) {
            const double r = siegert_rate(p, {mu, sigma});
            CHECK(r >= prev - 1e-9);
            prev = r;
        }
    }
    for (double mu : {0.0, 0.3, 0.6}) {  // subthreshold drift: mu tau_m < 15 mV
        double prev = -1.0;
        for (double sigma = 0.2; sigma <= 4.0; sigma += 0.2) {
            const double r = siegert_rate(p, {mu, sigma});
            CHECK(r >= prev - 1e-9);
            prev = r;
        }
    }
}

TEST_CASE("quadrature result is insensitive to the tolerance") {
    const auto p = reference_params();
    for (double mu : {0.2, 0.8, 1.5})
        for (double sigma : {0.3, 1.0, 2.5}) {
            const double lib = siegert_rate(p, {mu, sigma});
            const double tol8 = siegert_oracle(p, {mu, sigma}, 1e-8);
            const double tol9 = siegert_oracle(p, {mu, sigma}, 5e-9);
            CHECK(lib == doctest::Approx(tol8).epsilon(1e-6));
            CHECK(tol8 == doctest::Approx(tol9).epsilon(1e-6));
        }
}

TEST_CASE("tuning curve: deterministic row matches the closed form") {
    const auto p = reference_params();
    TuningConfig cfg;
    cfg.duration = 10000.0;
    cfg.trials = 2;
    cfg.dt = 0.1;
    cfg.sample_dt = 0.1;
    const std::vector<double> m_grid{0.25, 0.3, 0.5, 1.0};
    const auto samples =
        measure_tuning_curve(p, m_grid, {0.0}, TuningMode::CurrentSource, cfg);
    REQUIRE(samples.size() == m_grid.size());
    for (const auto& s : samples) {
        const double expected = rate_constant_current(p, s.m_i);
        // window-truncation quantizes the count by +-1 spike, so allow 5%
        if (expected >= 10.0)
            CHECK(std::fabs(s.rate - expected) / expected < 0.05);
        CHECK(s.rate_min <= s.rate + 1e-12);
        CHECK(s.rate <= s.rate_max + 1e-12);
    }
}

TEST_CASE("tuning curve: poisson rates at tau_syn = 1 ms exceed the current source") {
    auto p = reference_params();
    p.tau_syn = 1.0;
    TuningConfig cfg;
    cfg.duration = 4000.0;
    cfg.trials = 3;
    const std::vector<double> m_grid{0.3, 0.5};
    const std::vector<double> s_grid{0.4, 0.8};
    const auto cur = measure_tuning_curve(p, m_grid, s_grid, TuningMode::CurrentSource, cfg);
    const auto poi = measure_tuning_curve(p, m_grid, s_grid, TuningMode::PoissonEnsemble, cfg);
    REQUIRE(cur.size() == poi.size());
    for (std::size_t i = 0; i < cur.size(); ++i) CHECK(poi[i].rate > cur[i].rate);
}

TEST_CASE("tuning curve: infeasible poisson points are skipped") {
    auto p = reference_params();
    p.tau_syn = 5.0;
    TuningConfig cfg;
    cfg.duration = 200.0;
    cfg.trials = 1;
    // s = 0 with m > 0 has no Poisson realization
    const auto samples =
        measure_tuning_curve(p, {0.5}, {0.0}, TuningMode::PoissonEnsemble, cfg);
    CHECK(samples.empty());
}

TEST_CASE("calibration recovers zero-residual synthetic parameters") {
    const auto samples = synthetic_samples(0.19, 208.76);
    const auto calib = calibrate(samples, 1.0);
    CHECK(calib.k == doctest::Approx(0.19).epsilon(1e-6));
    CHECK(calib.s == doctest::Approx(208.76).epsilon(1e-6));
    CHECK(calib.fit_rmse < 1e-4);
}

TEST_CASE("calibration is scale-consistent") {
    auto samples = synthetic_samples(0.35, 201.06);
    const auto base = calibrate(samples, 10.0);
    for (auto& s : samples) {
        s.rate *= 3.0;
        s.rate_min *= 3.0;
        s.rate_max *= 3.0;
    }
    const auto scaled = calibrate(samples, 10.0);
    CHECK(scaled.k == doctest::Approx(base.k).epsilon(1e-6));
    CHECK(scaled.s == doctest::Approx(3.0 * base.s).epsilon(1e-6));
}

TEST_CASE("calibration input validation") {
    const auto all = synthetic_samples(0.3, 100.0);
    std::vector<TuningSample> few(all.begin(), all.begin() + 5);
    CHECK_THROWS_AS(calibrate(few, 5.0), std::invalid_argument);

    auto one_s = synthetic_samples(0.3, 100.0);
    for (auto& s : one_s) s.s_i = 0.5;
    CHECK_THROWS_AS(calibrate(one_s, 5.0), std::invalid_argument);

    auto zeros = synthetic_samples(0.3, 100.0);
    for (auto& s : zeros) s.rate = 0.0;
    CHECK_THROWS_AS(calibrate(zeros, 5.0), std::invalid_argument);
}

TEST_CASE("calibration json round trip") {
    Calibration calib{0.27, 188.5, 5.0, 3.25};
    const std::string path = "calib_roundtrip_test.json";
    write_calibration_json(calib, path, "unit-test");
    const auto back = read_calibration_json(path);
    CHECK(back.k == doctest::Approx(calib.k).epsilon(1e-12));
    CHECK(back.s == doctest::Approx(calib.s).epsilon(1e-12));
    CHECK(back.tau_syn == doctest::Approx(calib.tau_syn).epsilon(1e-12));
    CHECK(back.fit_rmse == doctest::Approx(calib.fit_rmse).epsilon(1e-12));
    std::remove(path.c_str());
}

TEST_CASE("tuning csv emitter writes the documented header") {
    const auto samples = synthetic_samples(0.3, 100.0);
    const std::string path = "tuning_csv_test.csv";
    write_tuning_csv(samples, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "m_i,s_i,rate,rate_min,rate_max");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == samples.size());
    std::remove(path.c_str());
}

#include "nsp/response.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "nsp/activations.hpp"
#include "nsp/rng.hpp"
#include "nsp/special.hpp"
#include "nsp/stimulus.hpp"

namespace nsp {

double rate_constant_current(const LifParams& params, double i_nA) {
    const double drive = i_nA * params.r_m();  // mV
    const double gap = params.v_thresh - params.v_rest;
    if (drive <= gap) return 0.0;
    const double t_isi = params.tau_refrac - params.tau_m * std::log(1.0 - gap / drive);  // ms
    return 1000.0 / t_isi;
}

DiffusionStats current_stats_to_diffusion(double m_i, double s_i, double dt,
                                          const LifParams& params) {
    if (!(dt > 0.0)) throw std::invalid_argument("current_stats_to_diffusion: dt must be positive");
    return {m_i / params.c_m, s_i * std::sqrt(dt) / params.c_m};
}

namespace {

double siegert_integrand(double u) {
    return std::sqrt(M_PI) * erfcx(-u);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double rel_tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = siegert_integrand(lm), frm = siegert_integrand(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * rel_tol * std::fabs(left + right) || (b - a) < 1e-13)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw std::runtime_error("siegert_rate: quadrature failed to converge on [" +
                                 std::to_string(a) + ", " + std::to_string(b) + "]");
    return adaptive_simpson(a, m, fa, flm, fm, left, rel_tol, depth - 1) +
           adaptive_simpson(m, b, fm, frm, fb, right, rel_tol, depth - 1);
}

double integrate_siegert(double a, double b, double rel_tol) {
    const double m = 0.5 * (a + b);
    const double fa = siegert_integrand(a), fm = siegert_integrand(m), fb = siegert_integrand(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(a, b, fa, fm, fb, whole, rel_tol, 60);
}

}  // namespace

double siegert_rate(const LifParams& params, const DiffusionStats& stats) {
    params.validate();
    if (!(stats.sigma >= 0.0)) throw std::invalid_argument("siegert_rate: sigma must be nonnegative");
    if (stats.sigma == 0.0) return rate_constant_current(params, stats.mu * params.c_m);

    const double denom = stats.sigma * std::sqrt(params.tau_m);
    // potentials relative to rest; the lower bound is anchored at the
    // resting potential (reset equals rest in the reference parameter set)
    const double a = (0.0 - stats.mu * params.tau_m) / denom;
    const double b = (params.v_thresh - params.v_rest - stats.mu * params.tau_m) / denom;
    // integrand ~ 2 sqrt(pi) exp(u^2) for u >> 0: the integral is astronomically
    // large and the rate indistinguishable from zero
    if (b > 25.0) return 0.0;
    const double integral = integrate_siegert(a, b, 1e-8);
    return 1000.0 / (params.tau_refrac + params.tau_m * integral);
}

std::vector<TuningSample> measure_tuning_curve(const LifParams& params,
                                               const std::vector<double>& m_grid,
                                               const std::vector<double>& s_grid,
                                               TuningMode mode, const TuningConfig& config) {
    if (m_grid.empty() || s_grid.empty())
        throw std::invalid_argument("measure_tuning_curve: grids must be nonempty");
    params.validate();

    std::vector<TuningSample> samples;
    samples.reserve(m_grid.size() * s_grid.size());
    std::size_t point = 0;
    for (double s : s_grid) {
        for (double m : m_grid) {
            ++point;
            TuningSample sample;
            sample.m_i = m;
            sample.s_i = s;
            sample.trials = config.trials;
            sample.rate_min = 1e12;
            sample.rate_max = 0.0;
            double rate_sum = 0.0;
            bool feasible = true;
            for (int trial = 0; trial < config.trials; ++trial) {
                const std::uint64_t seed = derive_seed(config.seed, point, static_cast<std::uint64_t>(trial));
                double rate = 0.0;
                if (mode == TuningMode::CurrentSource) {
                    NoisyCurrentSpec spec{m, s, config.sample_dt, seed};
                    auto res = simulate_neuron(params, noisy_current(spec, config.duration, config.dt),
                                               config.duration, config.dt);
                    rate = res.rate_hz();
                } else {
                    PoissonEnsembleSpec spec;
                    try {
                        spec = stats_to_ensemble(m, s, params.tau_syn, config.source_count);
                    } catch (const std::invalid_argument&) {
                        feasible = false;
                        break;
                    }
                    std::vector<WeightedInput> inputs;
                    inputs.reserve(spec.count());
                    try {
                        for (std::size_t i = 0; i < spec.count(); ++i) {
                            WeightedInput in;
                            in.weight = spec.weights[i];
                            in.train = poisson_train(spec.rates[i], config.duration, config.dt,
                                                     derive_seed(seed, i));
                            inputs.push_back(std::move(in));
                        }
                    } catch (const std::invalid_argument&) {
                        feasible = false;  // source rate unrepresentable at this dt
                        break;
                    }
                    rate = simulate_neuron(params, inputs, config.duration, config.dt).rate_hz();
                }
                rate_sum += rate;
                sample.rate_min = std::min(sample.rate_min, rate);
                sample.rate_max = std::max(sample.rate_max, rate);
            }
            if (!feasible) continue;  // skipped and reported by omission
            sample.rate = rate_sum / config.trials;
            samples.push_back(sample);
        }
    }
    return samples;
}

namespace {

struct FitResult {
    double s = 0.0;
    double sse = 0.0;
};

FitResult fit_scale_for_k(const std::vector<TuningSample>& samples, double k) {
    double ff = 0.0, fr = 0.0, rr = 0.0;
    for (const auto& sample : samples) {
        const double f = noisy_softplus(sample.m_i, sample.s_i, k);
        ff += f * f;
        fr += f * sample.rate;
        rr += sample.rate * sample.rate;
    }
    FitResult res;
    res.s = ff > 0.0 ? fr / ff : 0.0;
    res.sse = rr - 2.0 * res.s * fr + res.s * res.s * ff;
    return res;
}

}  // namespace

Calibration calibrate(const std::vector<TuningSample>& samples, double tau_syn) {
    if (samples.size() < 10)
        throw std::invalid_argument("calibrate: need at least 10 samples");
    std::set<double> s_values;
    bool any_rate = false;
    for (const auto& sample : samples) {
        s_values.insert(sample.s_i);
        if (sample.rate > 0.0) any_rate = true;
    }
    if (s_values.size() < 2)
        throw std::invalid_argument("calibrate: samples must span at least 2 distinct s values");
    if (!any_rate) throw std::invalid_argument("calibrate: degenerate samples, all rates zero");

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.01, hi = 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = fit_scale_for_k(samples, x1).sse;
    double f2 = fit_scale_for_k(samples, x2).sse;
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12; ++iter) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = fit_scale_for_k(samples, x1).sse;
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = fit_scale_for_k(samples, x2).sse;
        }
    }
    Calibration calib;
    calib.k = 0.5 * (lo + hi);
    const auto fit = fit_scale_for_k(samples, calib.k);
    calib.s = fit.s;
    calib.tau_syn = tau_syn;
    calib.fit_rmse = std::sqrt(std::max(0.0, fit.sse) / static_cast<double>(samples.size()));
    if (!(calib.k > 0.0) || !(calib.s > 0.0))
        throw std::invalid_argument("calibrate: fit collapsed to non-positive parameters");
    return calib;
}

void write_tuning_csv(const std::vector<TuningSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "m_i,s_i,rate,rate_min,rate_max\n";
    char buf[160];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", s.m_i, s.s_i, s.rate,
                      s.rate_min, s.rate_max);
        out << buf;
    }
}

void write_calibration_json(const Calibration& calib, const std::string& path,
                            const std::string& provenance) {
    nlohmann::json j;
    j["k"] = calib.k;
    j["s"] = calib.s;
    j["tau_syn"] = calib.tau_syn;
    j["fit_rmse"] = calib.fit_rmse;
    j["provenance"] = provenance;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

Calibration read_calibration_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    Calibration calib;
    calib.k = j.at("k").get<double>();
    calib.s = j.at("s").get<double>();
    calib.tau_syn = j.at("tau_syn").get<double>();
    calib.fit_rmse = j.value("fit_rmse", 0.0);
    return calib;
}

}  // namespace nsp

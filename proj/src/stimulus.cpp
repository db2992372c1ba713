#include "nsp/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nsp/rng.hpp"

namespace nsp {

CurrentTrace noisy_current(const NoisyCurrentSpec& spec, double duration, double sim_dt) {
    if (!(spec.std >= 0.0)) throw std::invalid_argument("noisy_current: std must be nonnegative");
    if (!(sim_dt > 0.0) || !(spec.sample_dt > 0.0))
        throw std::invalid_argument("noisy_current: time steps must be positive");
    const double ratio = spec.sample_dt / sim_dt;
    const auto hold = static_cast<std::size_t>(std::llround(ratio));
    if (hold < 1 || std::fabs(ratio - static_cast<double>(hold)) > 1e-9)
        throw std::invalid_argument("noisy_current: sample_dt must be an integer multiple of sim_dt");

    const auto n_steps = static_cast<std::size_t>(std::llround(duration / sim_dt));
    CurrentTrace trace;
    trace.dt = sim_dt;
    trace.samples.resize(n_steps);

    Rng rng(spec.seed);
    std::normal_distribution<double> normal(spec.mean, spec.std);
    double held = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        if (i % hold == 0) held = spec.std > 0.0 ? normal(rng) : spec.mean;
        trace.samples[i] = held;
    }
    return trace;
}

SpikeTrain poisson_train(double rate_hz, double duration_ms, double dt_ms, std::uint64_t seed) {
    if (!(rate_hz >= 0.0)) throw std::invalid_argument("poisson_train: rate must be nonnegative");
    const double p = rate_hz * dt_ms / 1000.0;
    if (p >= 1.0)
        throw std::invalid_argument("poisson_train: rate*dt >= 1, rate unrepresentable at this resolution");
    SpikeTrain train;
    if (rate_hz == 0.0) return train;
    const auto n_steps = static_cast<std::size_t>(std::llround(duration_ms / dt_ms));
    Rng rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = 0; i < n_steps; ++i)
        if (uniform(rng) < p) train.times.push_back(static_cast<double>(i) * dt_ms);
    return train;
}

CurrentStats ensemble_to_stats(const PoissonEnsembleSpec& spec, double tau_syn) {
    if (spec.weights.size() != spec.rates.size())
        throw std::invalid_argument("ensemble_to_stats: weights/rates size mismatch");
    CurrentStats stats;
    for (std::size_t i = 0; i < spec.count(); ++i) {
        const double rate_khz = spec.rates[i] / 1000.0;
        stats.mean += tau_syn * spec.weights[i] * rate_khz;
        stats.variance += 0.5 * tau_syn * spec.weights[i] * spec.weights[i] * rate_khz;
    }
    return stats;
}

PoissonEnsembleSpec stats_to_ensemble(double m_i, double s_i, double tau_syn, int count,
                                      double split, double weight_magnitude) {
    if (!(s_i >= 0.0)) throw std::invalid_argument("stats_to_ensemble: s_i must be nonnegative");
    if (count < 0 || split < 0.0 || split > 1.0)
        throw std::invalid_argument("stats_to_ensemble: invalid count or split");

    PoissonEnsembleSpec spec;
    if (count == 0) {
        if (m_i != 0.0 || s_i != 0.0)
            throw std::invalid_argument("stats_to_ensemble: nonzero target requires count > 0");
        return spec;
    }
    const int n_exc = static_cast<int>(std::lround(split * count));
    const int n_inh = count - n_exc;

    if (s_i == 0.0) {
        if (m_i != 0.0)
            throw std::invalid_argument(
                "stats_to_ensemble: infeasible, nonzero mean requires nonzero variance (s_i > 0)");
        spec.weights.assign(count, 0.0);
        spec.rates.assign(count, 0.0);
        return spec;
    }

    double w = weight_magnitude;
    if (w <= 0.0) {
        // target a mean per-source rate of ~300 Hz, then shrink if needed
        // to keep both population rates nonnegative
        w = s_i * std::sqrt(2000.0 / (tau_syn * count * 300.0));
        if (m_i != 0.0) w = std::min(w, 2.0 * s_i * s_i / std::fabs(m_i));
    }

    const double sum = 2000.0 * s_i * s_i / (tau_syn * w * w);  // n_e*l_e + n_i*l_i, Hz
    const double diff = 1000.0 * m_i / (tau_syn * w);           // n_e*l_e - n_i*l_i, Hz
    const double p_exc = 0.5 * (sum + diff);
    const double q_inh = 0.5 * (sum - diff);
    if (p_exc < -1e-9 || q_inh < -1e-9)
        throw std::invalid_argument(
            "stats_to_ensemble: infeasible target, requires 2*s_i^2 >= |m_i|*w (population rate negative)");
    if (p_exc > 1e-9 && n_exc == 0)
        throw std::invalid_argument("stats_to_ensemble: positive excitatory rate but no excitatory sources");
    if (q_inh > 1e-9 && n_inh == 0)
        throw std::invalid_argument("stats_to_ensemble: positive inhibitory rate but no inhibitory sources");

    const double rate_exc = n_exc > 0 ? std::max(0.0, p_exc) / n_exc : 0.0;
    const double rate_inh = n_inh > 0 ? std::max(0.0, q_inh) / n_inh : 0.0;
    spec.weights.reserve(count);
    spec.rates.reserve(count);
    for (int i = 0; i < n_exc; ++i) { spec.weights.push_back(w); spec.rates.push_back(rate_exc); }
    for (int i = 0; i < n_inh; ++i) { spec.weights.push_back(-w); spec.rates.push_back(rate_inh); }
    return spec;
}

TraceDiagnostics trace_diagnostics(const CurrentTrace& trace, double max_lag_ms) {
    const std::size_t n = trace.samples.size();
    if (n == 0) throw std::invalid_argument("trace_diagnostics: empty trace");
    const auto max_lag = static_cast<std::size_t>(std::llround(max_lag_ms / trace.dt));
    if (n < 2 * max_lag)
        throw std::invalid_argument("trace_diagnostics: trace shorter than 2*max_lag");

    TraceDiagnostics d;

    // histogram, Freedman-Diaconis bin rule
    std::vector<double> sorted(trace.samples);
    std::sort(sorted.begin(), sorted.end());
    const double q1 = sorted[n / 4];
    const double q3 = sorted[(3 * n) / 4];
    const double iqr = q3 - q1;
    const double lo = sorted.front(), hi = sorted.back();
    double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    std::size_t bins = 1;
    if (width > 0.0 && hi > lo) bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::min<std::size_t>(std::max<std::size_t>(bins, 1), 4096);
    width = bins > 0 && hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    d.hist_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) d.hist_edges[b] = lo + width * static_cast<double>(b);
    d.hist_density.assign(bins, 0.0);
    for (double v : trace.samples) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        d.hist_density[b] += 1.0;
    }
    for (double& v : d.hist_density) v /= static_cast<double>(n) * width;

    // normalized autocorrelation
    const double mean = std::accumulate(trace.samples.begin(), trace.samples.end(), 0.0) /
                        static_cast<double>(n);
    double var = 0.0;
    for (double v : trace.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    d.autocorr.assign(max_lag + 1, 0.0);
    if (var <= 1e-20 * (mean * mean + 1.0)) {  // constant up to accumulation rounding
        d.autocorr_defined = false;
    } else {
        for (std::size_t lag = 0; lag <= max_lag; ++lag) {
            double acc = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i)
                acc += (trace.samples[i] - mean) * (trace.samples[i + lag] - mean);
            d.autocorr[lag] = acc / (static_cast<double>(n) * var);
        }
    }

    // segment-averaged periodogram by direct DFT; fixed segment length so
    // diagnostic files are bit-stable for a given seed
    const std::size_t seg = std::min<std::size_t>(n, 2048);
    const std::size_t n_segments = n / seg;
    const std::size_t n_freq = seg / 2 + 1;
    d.psd.assign(n_freq, 0.0);
    d.psd_freq_hz.resize(n_freq);
    const double fs_hz = 1000.0 / trace.dt;
    for (std::size_t k = 0; k < n_freq; ++k)
        d.psd_freq_hz[k] = fs_hz * static_cast<double>(k) / static_cast<double>(seg);
    for (std::size_t s = 0; s < n_segments; ++s) {
        const double* x = trace.samples.data() + s * seg;
        for (std::size_t k = 0; k < n_freq; ++k) {
            std::complex<double> acc(0.0, 0.0);
            const double w0 = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(seg);
            for (std::size_t i = 0; i < seg; ++i) {
                const double ph = w0 * static_cast<double>(i);
                acc += std::complex<double>((x[i] - mean) * std::cos(ph), (x[i] - mean) * std::sin(ph));
            }
            d.psd[k] += std::norm(acc) / (static_cast<double>(seg) * fs_hz);
        }
    }
    if (n_segments > 0)
        for (double& v : d.psd) v /= static_cast<double>(n_segments);
    return d;
}

void write_diagnostics_csv(const TraceDiagnostics& d, const std::string& prefix) {
    {
        std::ofstream out(prefix + "_hist.csv");
        if (!out) throw std::runtime_error("cannot open " + prefix + "_hist.csv");
        out << "bin_left,bin_right,density\n";
        char buf[96];
        for (std::size_t b = 0; b < d.hist_density.size(); ++b) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", d.hist_edges[b], d.hist_edges[b + 1],
                          d.hist_density[b]);
            out << buf;
        }
    }
    {
        std::ofstream out(prefix + "_autocorr.csv");
        out << "lag,autocorr\n";
        char buf[64];
        for (std::size_t i = 0; i < d.autocorr.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, d.autocorr[i]);
            out << buf;
        }
    }
    {
        std::ofstream out(prefix + "_psd.csv");
        out << "freq_hz,psd\n";
        char buf[64];
        for (std::size_t i = 0; i < d.psd.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", d.psd_freq_hz[i], d.psd[i]);
            out << buf;
        }
    }
}

}  // namespace nsp

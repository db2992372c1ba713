#include "nsp/lif.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nsp {

void LifParams::validate() const {
    if (!(tau_m > 0.0) || !(c_m > 0.0) || !(tau_syn > 0.0))
        throw std::invalid_argument("LifParams: tau_m, c_m, tau_syn must be positive");
    if (!(tau_refrac >= 0.0))
        throw std::invalid_argument("LifParams: tau_refrac must be nonnegative");
    if (!(v_thresh > v_rest))
        throw std::invalid_argument("LifParams: v_thresh must exceed v_rest");
    if (!(v_reset <= v_thresh))
        throw std::invalid_argument("LifParams: v_reset must not exceed v_thresh");
}

bool lif_step(NeuronState& state, const LifParams& params, double i_ext, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("lif_step: dt must be positive");
    if (!std::isfinite(i_ext)) throw std::invalid_argument("lif_step: non-finite input current");

    const double syn_decay = std::exp(-dt / params.tau_syn);

    if (state.refrac_remaining > 0.0) {
        state.v = params.v_reset;
        state.refrac_remaining = std::max(0.0, state.refrac_remaining - dt);
        state.i_syn_exc *= syn_decay;
        state.i_syn_inh *= syn_decay;
        return false;
    }

    const double i_total = i_ext + params.i_offset + state.i_syn_exc + state.i_syn_inh;
    const double v_inf = params.v_rest + params.r_m() * i_total;
    state.v = v_inf + (state.v - v_inf) * std::exp(-dt / params.tau_m);

    state.i_syn_exc *= syn_decay;
    state.i_syn_inh *= syn_decay;

    if (state.v >= params.v_thresh) {
        state.v = params.v_reset;
        state.refrac_remaining = params.tau_refrac;
        return true;
    }
    return false;
}

namespace {

SimResult run_sim(const LifParams& params, double duration, double dt, bool record_state,
                  const std::vector<double>& i_ext_per_step,
                  const std::vector<std::vector<double>>& syn_increments_per_step) {
    params.validate();
    if (!(duration > 0.0)) throw std::invalid_argument("simulate_neuron: duration must be positive");
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(duration / dt));

    SimResult result;
    result.duration = duration;
    if (record_state) {
        result.v_trace.reserve(n_steps);
        result.i_syn_trace.reserve(n_steps);
    }

    NeuronState state;
    state.v = params.v_rest;

    for (std::size_t step = 0; step < n_steps; ++step) {
        if (!syn_increments_per_step.empty()) {
            for (double w : syn_increments_per_step[step]) {
                if (w >= 0.0) state.i_syn_exc += w; else state.i_syn_inh += w;
            }
        }
        if (record_state) result.i_syn_trace.push_back(state.i_syn_exc + state.i_syn_inh);
        const double i_ext = i_ext_per_step.empty() ? 0.0 : i_ext_per_step[step];
        const bool fired = lif_step(state, params, i_ext, dt);
        if (record_state) result.v_trace.push_back(state.v);
        if (fired) {
            const double t = static_cast<double>(step + 1) * dt;
            result.spikes.times.push_back(t);
            state.last_spike = t;
        }
    }
    return result;
}

}  // namespace

SimResult simulate_neuron(const LifParams& params, const CurrentTrace& drive,
                          double duration, double dt, bool record_state) {
    if (!(drive.dt > 0.0)) throw std::invalid_argument("simulate_neuron: trace dt must be positive");
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(duration / dt));
    std::vector<double> i_ext(n_steps, 0.0);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const std::size_t idx = static_cast<std::size_t>(t / drive.dt);
        if (idx < drive.samples.size()) {
            const double v = drive.samples[idx];
            if (!std::isfinite(v))
                throw std::invalid_argument("simulate_neuron: non-finite current sample");
            i_ext[step] = v;
        }
    }
    return run_sim(params, duration, dt, record_state, i_ext, {});
}

SimResult simulate_neuron(const LifParams& params, const std::vector<WeightedInput>& inputs,
                          double duration, double dt, bool record_state) {
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(duration / dt));
    std::vector<std::vector<double>> increments(n_steps);
    for (const auto& input : inputs) {
        for (double t : input.train.times) {
            if (t < 0.0 || t > duration)
                throw std::invalid_argument("simulate_neuron: input spike outside [0, duration]");
            std::size_t step = static_cast<std::size_t>(t / dt);
            if (step >= n_steps) step = n_steps - 1;
            increments[step].push_back(input.weight);
        }
    }
    return run_sim(params, duration, dt, record_state, {}, increments);
}

void write_trace_csv(const std::vector<double>& values, double dt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "time_ms,value\n";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", static_cast<double>(i) * dt, values[i]);
        out << buf;
    }
}

void write_spikes_csv(const SpikeTrain& train, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "time_ms,value\n";
    char buf[64];
    for (double t : train.times) {
        std::snprintf(buf, sizeof(buf), "%.9g,%d\n", t, train.source_id);
        out << buf;
    }
}

}  // namespace nsp

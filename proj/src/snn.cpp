#include "nsp/snn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "nsp/rng.hpp"

namespace nsp {

namespace {

struct Edge {
    int pre;
    int post;
    double w;
};

void unroll_conv(const LayerSpec& spec, const Shape& in, const Shape& out,
                 const std::vector<double>& w, int pre_base, int post_base,
                 std::vector<Edge>& edges) {
    const int k = spec.kernel;
    for (int oc = 0; oc < out.c; ++oc)
        for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) {
                const int post = post_base + (oc * out.h + oy) * out.w + ox;
                for (int ic = 0; ic < in.c; ++ic)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int pre = pre_base + (ic * in.h + oy + ky) * in.w + ox + kx;
                            const double wij = w[((static_cast<std::size_t>(oc) * in.c + ic) * k +
                                                  ky) * k + kx];
                            edges.push_back({pre, post, wij});
                        }
            }
}

void unroll_pool(const LayerSpec& spec, const Shape& in, const Shape& out, int pre_base,
                 int post_base, std::vector<Edge>& edges) {
    const int s = spec.stride;
    const double w = 1.0 / (static_cast<double>(s) * s);
    for (int c = 0; c < out.c; ++c)
        for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) {
                const int post = post_base + (c * out.h + oy) * out.w + ox;
                for (int dy = 0; dy < s; ++dy)
                    for (int dx = 0; dx < s; ++dx)
                        edges.push_back(
                            {pre_base + (c * in.h + oy * s + dy) * in.w + ox * s + dx, post, w});
            }
}

void unroll_dense(const Shape& in, const Shape& out, const std::vector<double>& w, int pre_base,
                  int post_base, std::vector<Edge>& edges) {
    const int n_in = in.size();
    for (int o = 0; o < out.c; ++o)
        for (int i = 0; i < n_in; ++i)
            edges.push_back({pre_base + i, post_base + o,
                             w[static_cast<std::size_t>(o) * n_in + i]});
}

}  // namespace

SpikingNetwork build_snn(const WeightStore& ws, const LifParams& params) {
    ws.validate();
    params.validate();
    for (const auto& spec : ws.arch)
        if (spec.kind != LayerSpec::Kind::Conv && spec.kind != LayerSpec::Kind::AvgPool &&
            spec.kind != LayerSpec::Kind::Dense)
            throw std::invalid_argument("build_snn: unsupported layer kind");

    const auto shapes = layer_shapes(ws.arch, ws.input);
    SpikingNetwork net;
    net.params = params;
    net.n_input = ws.input.size();

    net.layer_offsets.push_back(net.n_input);
    int total = net.n_input;
    for (const auto& shape : shapes) {
        total += shape.size();
        net.layer_offsets.push_back(total);
    }
    net.n_neurons = total - net.n_input;

    std::vector<Edge> edges;
    Shape in = ws.input;
    int pre_base = 0;
    for (std::size_t l = 0; l < ws.arch.size(); ++l) {
        const int post_base = net.layer_offsets[l];
        switch (ws.arch[l].kind) {
            case LayerSpec::Kind::Conv:
                unroll_conv(ws.arch[l], in, shapes[l], ws.tensors[l], pre_base, post_base, edges);
                break;
            case LayerSpec::Kind::AvgPool:
                unroll_pool(ws.arch[l], in, shapes[l], pre_base, post_base, edges);
                break;
            case LayerSpec::Kind::Dense:
                unroll_dense(in, shapes[l], ws.tensors[l], pre_base, post_base, edges);
                break;
        }
        pre_base = post_base;
        in = shapes[l];
    }

    // CSR by pre id
    const int n_ids = net.n_input + net.n_neurons;
    std::vector<std::size_t> counts(n_ids + 1, 0);
    for (const auto& e : edges) ++counts[e.pre + 1];
    for (int i = 0; i < n_ids; ++i) counts[i + 1] += counts[i];
    net.fanout_begin = counts;
    net.post.resize(edges.size());
    net.weight.resize(edges.size());
    std::vector<std::size_t> cursor(net.fanout_begin.begin(), net.fanout_begin.end() - 1);
    for (const auto& e : edges) {
        const std::size_t slot = cursor[e.pre]++;
        net.post[slot] = e.post;
        net.weight[slot] = e.w;
    }
    return net;
}

InferenceResult infer(const SpikingNetwork& net, const float* image, double duration,
                      double dt, double rate_scale_hz, std::uint64_t seed,
                      const std::vector<double>& checkpoints_ms) {
    if (!(duration > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("infer: duration and dt must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(duration / dt));
    const int n_classes = net.layer_offsets.back() - net.layer_offsets[net.layer_offsets.size() - 2];
    const int out_base = net.layer_offsets[net.layer_offsets.size() - 2] - net.n_input;

    std::vector<double> p_fire(net.n_input);
    for (int i = 0; i < net.n_input; ++i) {
        const double p = static_cast<double>(image[i]) * rate_scale_hz * dt / 1000.0;
        if (p >= 1.0) throw std::invalid_argument("infer: input rate unrepresentable at this dt");
        p_fire[i] = p;
    }

    std::vector<NeuronState> states(net.n_neurons);
    for (auto& s : states) s.v = net.params.v_rest;

    InferenceResult result;
    result.class_counts.assign(n_classes, 0);
    result.neuron_spike_counts.assign(net.n_neurons, 0);
    result.checkpoints_ms = checkpoints_ms;
    result.checkpoint_counts.resize(checkpoints_ms.size());
    std::size_t next_checkpoint = 0;

    Rng rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<int> fired_now;
    std::vector<int> fired_prev;  // delivered with one-step delay

    for (std::size_t step = 0; step < n_steps; ++step) {
        fired_now.clear();

        // input Poisson sources
        for (int i = 0; i < net.n_input; ++i)
            if (p_fire[i] > 0.0 && uniform(rng) < p_fire[i]) fired_now.push_back(i);

        // deliver last step's spikes
        for (int pre : fired_prev) {
            for (std::size_t s = net.fanout_begin[pre]; s < net.fanout_begin[pre + 1]; ++s) {
                NeuronState& st = states[net.post[s] - net.n_input];
                if (net.weight[s] >= 0.0) st.i_syn_exc += net.weight[s];
                else st.i_syn_inh += net.weight[s];
            }
            result.synaptic_events += net.fanout_count(pre);
        }

        // advance all LIF neurons
        for (int n = 0; n < net.n_neurons; ++n) {
            if (lif_step(states[n], net.params, 0.0, dt)) {
                fired_now.push_back(n + net.n_input);
                ++result.neuron_spike_counts[n];
                if (!std::isfinite(states[n].v))
                    throw std::runtime_error("infer: non-finite membrane state");
                const int cls = n - out_base;
                if (cls >= 0 && cls < n_classes) ++result.class_counts[cls];
            }
        }

        const double t = static_cast<double>(step + 1) * dt;
        while (next_checkpoint < checkpoints_ms.size() &&
               t >= checkpoints_ms[next_checkpoint] - 1e-9) {
            result.checkpoint_counts[next_checkpoint] = result.class_counts;
            ++next_checkpoint;
        }
        std::swap(fired_prev, fired_now);
    }
    while (next_checkpoint < checkpoints_ms.size()) {
        result.checkpoint_counts[next_checkpoint] = result.class_counts;
        ++next_checkpoint;
    }

    long long best = -1;
    for (int c = 0; c < n_classes; ++c)
        if (result.class_counts[c] > best) {
            best = result.class_counts[c];
            result.predicted = c;
        }
    result.degenerate = best == 0;

    result.output_rates_hz.resize(n_classes);
    for (int c = 0; c < n_classes; ++c)
        result.output_rates_hz[c] =
            1000.0 * static_cast<double>(result.class_counts[c]) / duration;
    return result;
}

SnnEvaluation evaluate_snn(const SpikingNetwork& net, const Dataset& data, double duration,
                           double dt, std::uint64_t seed,
                           const std::vector<double>& checkpoints_ms, int threads) {
    if (data.size() == 0) throw std::invalid_argument("evaluate_snn: dataset is empty");
    const std::size_t n = data.size();
    SnnEvaluation eval;
    eval.checkpoints_ms = checkpoints_ms;
    eval.predictions.assign(n, -1);
    std::vector<long long> events(n, 0);
    std::vector<char> correct(n, 0);
    std::vector<std::vector<char>> ckpt_correct(checkpoints_ms.size(),
                                                std::vector<char>(n, 0));

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto result = infer(net, data.image(i), duration, dt, 100.0,
                                      derive_seed(seed, i), checkpoints_ms);
            eval.predictions[i] = result.predicted;
            events[i] = result.synaptic_events;
            correct[i] = result.predicted == data.labels[i] ? 1 : 0;
            for (std::size_t c = 0; c < checkpoints_ms.size(); ++c) {
                const auto& counts = result.checkpoint_counts[c];
                int pred = 0;
                long long best = -1;
                for (std::size_t k = 0; k < counts.size(); ++k)
                    if (counts[k] > best) { best = counts[k]; pred = static_cast<int>(k); }
                ckpt_correct[c][i] = pred == data.labels[i] ? 1 : 0;
            }
        }
    };

    if (threads <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(n, t * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        n_correct += correct[i];
        eval.total_synaptic_events += events[i];
    }
    eval.error_rate = 1.0 - static_cast<double>(n_correct) / static_cast<double>(n);
    for (std::size_t c = 0; c < checkpoints_ms.size(); ++c) {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < n; ++i) ok += ckpt_correct[c][i];
        eval.accuracy_at_checkpoint.push_back(static_cast<double>(ok) / static_cast<double>(n));
    }
    return eval;
}

ConvRatesResult convolve_rates_experiment(const WeightStore& ws, const Dataset& images,
                                          std::size_t n_images, double duration, double dt,
                                          double rate_scale_hz, std::uint64_t seed,
                                          double softplus_sigma) {
    if (ws.arch.empty() || ws.arch.front().kind != LayerSpec::Kind::Conv)
        throw std::invalid_argument("convolve_rates_experiment: first layer must be conv");
    n_images = std::min(n_images, images.size());

    // single feature map of the first conv layer
    WeightStore kernel_ws;
    LayerSpec conv = ws.arch.front();
    conv.out_maps = 1;
    kernel_ws.arch = {conv};
    kernel_ws.input = ws.input;
    kernel_ws.activation = ws.activation;
    kernel_ws.scale = ws.scale;
    const std::size_t map_size =
        static_cast<std::size_t>(ws.input.c) * conv.kernel * conv.kernel;
    kernel_ws.tensors = {std::vector<double>(ws.tensors.front().begin(),
                                             ws.tensors.front().begin() + map_size)};

    LifParams params = {};
    params.tau_syn = ws.scale.tau_syn;
    params.i_offset = 0.0;
    const SpikingNetwork net = build_snn(kernel_ws, params);

    ConvRatesResult result;
    const double tau_s = ws.scale.tau_syn / 1000.0;
    const int n_pixels = ws.input.size();

    ActivationKind ns{ActKind::NoisySoftplus, ws.activation.k, softplus_sigma};
    ActivationKind relu{ActKind::Relu, ws.activation.k, softplus_sigma};
    ActivationKind sp{ActKind::Softplus, ws.activation.k, softplus_sigma};

    double acc_ns = 0.0, acc_relu = 0.0, acc_sp = 0.0;
    for (std::size_t img = 0; img < n_images; ++img) {
        const auto measured =
            infer(net, images.image(img), duration, dt, rate_scale_hz, derive_seed(seed, img));
        const auto x = encode_input(images.image(img), n_pixels, rate_scale_hz, ws.scale.tau_syn);
        const auto duals_ns = forward(kernel_ws, x, ns);
        const auto duals_relu = forward(kernel_ws, x, relu);
        const auto duals_sp = forward(kernel_ws, x, sp);

        const auto& d = duals_ns.back();
        for (std::size_t j = 0; j < d.y.size(); ++j) {
            const double measured_hz =
                1000.0 * static_cast<double>(measured.neuron_spike_counts[j]) / duration;
            const double pred_ns = d.y[j] / tau_s;
            const double pred_relu = duals_relu.back().y[j] / tau_s;
            const double pred_sp = duals_sp.back().y[j] / tau_s;
            result.measured_hz.push_back(measured_hz);
            result.predicted_ns_hz.push_back(pred_ns);
            result.predicted_relu_hz.push_back(pred_relu);
            result.predicted_softplus_hz.push_back(pred_sp);
            acc_ns += (pred_ns - measured_hz) * (pred_ns - measured_hz);
            acc_relu += (pred_relu - measured_hz) * (pred_relu - measured_hz);
            acc_sp += (pred_sp - measured_hz) * (pred_sp - measured_hz);
        }
    }
    result.dist_noisy_softplus = std::sqrt(acc_ns);
    result.dist_relu = std::sqrt(acc_relu);
    result.dist_softplus = std::sqrt(acc_sp);
    return result;
}

EnergyReport energy_from_event_rate(double events_per_sec, double duration_s, double e_syn_nj) {
    if (!(e_syn_nj > 0.0)) throw std::invalid_argument("energy: e_syn must be positive");
    EnergyReport report;
    report.events_per_sec = events_per_sec;
    report.joules = events_per_sec * duration_s * e_syn_nj * 1e-9;
    report.watts = duration_s > 0.0 ? report.joules / duration_s : 0.0;
    return report;
}

EnergyReport energy_from_rates(const std::vector<double>& rates_hz,
                               const std::vector<int>& fanouts, double duration_s,
                               double e_syn_nj) {
    if (rates_hz.size() != fanouts.size())
        throw std::invalid_argument("energy: rates/fanouts size mismatch");
    double events_per_sec = 0.0;
    for (std::size_t i = 0; i < rates_hz.size(); ++i)
        events_per_sec += rates_hz[i] * fanouts[i];
    return energy_from_event_rate(events_per_sec, duration_s, e_syn_nj);
}

void write_accuracy_csv(const SnnEvaluation& eval, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "checkpoint_ms,accuracy\n";
    char buf[64];
    for (std::size_t i = 0; i < eval.checkpoints_ms.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", eval.checkpoints_ms[i],
                      eval.accuracy_at_checkpoint[i]);
        out << buf;
    }
}

}  // namespace nsp

// Command-line surface for tuning-curve measurement, calibration, ConvNet
// training and spiking-network evaluation. All randomness flows from one
// --seed per command; derived streams are pure functions of it.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsp/activations.hpp"
#include "nsp/annet.hpp"
#include "nsp/dataio.hpp"
#include "nsp/response.hpp"
#include "nsp/snn.hpp"
#include "nsp/stimulus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_grid(const std::string& text) {
    // "a:b:step" range or comma-separated list
    std::vector<double> values;
    const auto c1 = text.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) throw CLI::ValidationError("grid", "expected start:stop:step");
        const double start = std::stod(text.substr(0, c1));
        const double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = std::stod(text.substr(c2 + 1));
        if (step <= 0.0) throw CLI::ValidationError("grid", "step must be positive");
        for (double v = start; v <= stop + 1e-12; v += step) values.push_back(v);
        return values;
    }
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) values.push_back(std::stod(token));
    return values;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_metrics(const fs::path& path, json metrics, const json& config, double wall_s) {
    metrics["config"] = config;
    metrics["config_hash"] = fnv1a(config.dump());
    metrics["timing"] = {{"wall_time_s", wall_s}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << metrics.dump(2) << "\n";
}

void write_config_snapshot(const fs::path& dir, const json& config) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.json");
    out << config.dump(2) << "\n";
}

nsp::ActivationKind make_activation(const std::string& name, double k, double fixed_sigma) {
    nsp::ActivationKind kind;
    kind.k = k;
    kind.fixed_sigma = fixed_sigma;
    if (name == "noisy-softplus") kind.kind = nsp::ActKind::NoisySoftplus;
    else if (name == "relu") kind.kind = nsp::ActKind::Relu;
    else if (name == "softplus") kind.kind = nsp::ActKind::Softplus;
    else throw CLI::ValidationError("--activation", "unknown activation '" + name + "'");
    return kind;
}

std::string activation_name(const nsp::ActivationKind& kind) {
    switch (kind.kind) {
        case nsp::ActKind::NoisySoftplus: return "noisy-softplus";
        case nsp::ActKind::Relu: return "relu";
        case nsp::ActKind::Softplus: return "softplus";
    }
    return "?";
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double elapsed_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy-Softplus LIF toolkit: tuning curves, calibration, ANN training and "
                 "spiking inference"};
    app.require_subcommand(1);

    // ---- tuning-curve ----------------------------------------------------
    auto* tune = app.add_subcommand("tuning-curve", "Measure LIF tuning curves and trace diagnostics");
    std::string t_mode = "current", t_out, t_mgrid = "0:1.5:0.1", t_sgrid = "0.1,0.2,0.4,0.6,0.8,1.0";
    double t_dt = 1.0, t_sample_dt = 1.0, t_tau = 5.0, t_duration = 10000.0, t_ioffset = 0.1;
    int t_trials = 10;
    std::uint64_t t_seed = 42;
    tune->add_option("--mode", t_mode, "current | poisson")->check(CLI::IsMember({"current", "poisson"}));
    tune->add_option("--dt", t_dt, "simulation step, ms");
    tune->add_option("--sample-dt", t_sample_dt, "noisy-current sampling resolution, ms");
    tune->add_option("--tau-syn", t_tau, "synaptic time constant, ms");
    tune->add_option("--trials", t_trials);
    tune->add_option("--duration", t_duration, "per-trial duration, ms");
    tune->add_option("--seed", t_seed);
    tune->add_option("--m-grid", t_mgrid, "mean currents, nA (start:stop:step or list)");
    tune->add_option("--s-grid", t_sgrid, "current stds, nA");
    tune->add_option("--i-offset", t_ioffset, "bias current, nA");
    tune->add_option("--out", t_out, "output directory")->required();

    // ---- calibrate -------------------------------------------------------
    auto* cal = app.add_subcommand("calibrate", "Fit (k, S) of the Noisy Softplus rate model");
    std::string c_out, c_samples, c_mode = "poisson", c_mgrid = "0:1.5:0.1",
                c_sgrid = "0.1,0.2,0.4,0.6,0.8,1.0";
    double c_tau = 5.0, c_dt = 1.0, c_duration = 10000.0, c_ioffset = 0.1;
    int c_trials = 10;
    std::uint64_t c_seed = 42;
    cal->add_option("--tau-syn", c_tau, "synaptic time constant, ms");
    cal->add_option("--samples", c_samples, "tuning CSV to fit instead of measuring");
    cal->add_option("--mode", c_mode)->check(CLI::IsMember({"current", "poisson"}));
    cal->add_option("--m-grid", c_mgrid);
    cal->add_option("--s-grid", c_sgrid);
    cal->add_option("--dt", c_dt);
    cal->add_option("--duration", c_duration);
    cal->add_option("--trials", c_trials);
    cal->add_option("--seed", c_seed);
    cal->add_option("--i-offset", c_ioffset);
    cal->add_option("--out", c_out, "calibration JSON path")->required();

    // ---- train -----------------------------------------------------------
    auto* trn = app.add_subcommand("train", "Train the bias-free ConvNet");
    std::string n_images, n_labels, n_arch = "6c5-2s-12c5-2s-10fc", n_activation = "relu",
                n_out, n_calib;
    double n_lr0 = 0.1, n_decay = 0.9, n_tau = 5.0, n_k = 0.30, n_s = 201.0, n_offset = 0.0,
           n_fixed_sigma = 0.45;
    int n_epochs = 5, n_batch = 50;
    std::uint64_t n_seed = 1;
    std::size_t n_sub = 0;
    trn->add_option("--images", n_images, "IDX image file")->required();
    trn->add_option("--labels", n_labels, "IDX label file")->required();
    trn->add_option("--arch", n_arch);
    trn->add_option("--activation", n_activation);
    trn->add_option("--epochs", n_epochs);
    trn->add_option("--batch", n_batch);
    trn->add_option("--lr0", n_lr0);
    trn->add_option("--lr-decay", n_decay);
    trn->add_option("--seed", n_seed);
    trn->add_option("--label-offset", n_offset);
    trn->add_option("--tau-syn", n_tau);
    trn->add_option("--k", n_k, "activation shape factor");
    trn->add_option("--s", n_s, "rate scale factor, Hz");
    trn->add_option("--fixed-sigma", n_fixed_sigma, "softplus static noise level");
    trn->add_option("--calibration", n_calib, "calibration JSON (overrides --k/--s/--tau-syn)");
    trn->add_option("--subsample", n_sub, "stratified subset size (0 = all)");
    trn->add_option("--out", n_out, "output directory")->required();

    // ---- finetune ----------------------------------------------------------
    auto* ft = app.add_subcommand("finetune", "One-epoch noisy-softplus fine tuning with offset labels");
    std::string f_weights, f_images, f_labels, f_out, f_calib;
    double f_lr0 = 0.1, f_decay = 0.9, f_offset = 0.01;
    int f_epochs = 1, f_batch = 50;
    std::uint64_t f_seed = 1;
    std::size_t f_sub = 0;
    ft->add_option("--weights", f_weights, "weight base path (without .json/.bin)")->required();
    ft->add_option("--images", f_images)->required();
    ft->add_option("--labels", f_labels)->required();
    ft->add_option("--epochs", f_epochs);
    ft->add_option("--batch", f_batch);
    ft->add_option("--lr0", f_lr0);
    ft->add_option("--lr-decay", f_decay);
    ft->add_option("--label-offset", f_offset);
    ft->add_option("--seed", f_seed);
    ft->add_option("--calibration", f_calib,
                   "calibration JSON overriding the stored (k, S, tau_syn)");
    ft->add_option("--subsample", f_sub);
    ft->add_option("--out", f_out, "output directory")->required();

    // ---- eval-ann ----------------------------------------------------------
    auto* ea = app.add_subcommand("eval-ann", "Evaluate trained weights on artificial neurons");
    std::string ea_weights, ea_images, ea_labels, ea_out;
    std::size_t ea_sub = 0;
    std::uint64_t ea_seed = 1;
    ea->add_option("--weights", ea_weights)->required();
    ea->add_option("--images", ea_images)->required();
    ea->add_option("--labels", ea_labels)->required();
    ea->add_option("--subsample", ea_sub);
    ea->add_option("--seed", ea_seed);
    ea->add_option("--out", ea_out, "output directory")->required();

    // ---- eval-snn ----------------------------------------------------------
    auto* es = app.add_subcommand("eval-snn", "Direct-transfer spiking evaluation");
    std::string es_weights, es_images, es_labels, es_out, es_checkpoints = "100:1000:100";
    double es_duration = 1000.0, es_dt = 1.0, es_ioffset = 0.0;
    int es_threads = 1;
    std::size_t es_sub = 0;
    std::uint64_t es_seed = 1;
    es->add_option("--weights", es_weights)->required();
    es->add_option("--images", es_images)->required();
    es->add_option("--labels", es_labels)->required();
    es->add_option("--duration", es_duration, "presentation time per image, ms");
    es->add_option("--dt", es_dt, "simulation step, ms");
    es->add_option("--i-offset", es_ioffset, "bias current in the spiking network, nA");
    es->add_option("--threads", es_threads, "parallel image map (results independent of N)");
    es->add_option("--checkpoints", es_checkpoints, "accuracy-over-time checkpoints, ms");
    es->add_option("--subsample", es_sub);
    es->add_option("--seed", es_seed);
    es->add_option("--out", es_out, "output directory")->required();

    // ---- energy ------------------------------------------------------------
    auto* en = app.add_subcommand("energy", "Synaptic-event energy estimate");
    double en_events = 0.0, en_duration = 0.0, en_esyn = 8.0;
    std::string en_out;
    en->add_option("--events-per-sec", en_events)->required();
    en->add_option("--duration", en_duration, "seconds")->required();
    en->add_option("--esyn-nj", en_esyn, "energy per synaptic event, nJ");
    en->add_option("--out", en_out, "report JSON path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // exit 2 on usage errors
    }

    try {
        Timer timer;

        if (tune->parsed()) {
            const fs::path dir(t_out);
            nsp::LifParams params;
            params.tau_syn = t_tau;
            params.i_offset = t_ioffset;
            nsp::TuningConfig config{t_duration, t_trials, t_dt, t_sample_dt, 100, t_seed};
            const auto mode = t_mode == "current" ? nsp::TuningMode::CurrentSource
                                                  : nsp::TuningMode::PoissonEnsemble;
            const auto m_grid = parse_grid(t_mgrid);
            const auto s_grid = parse_grid(t_sgrid);
            json config_json = {{"command", "tuning-curve"}, {"mode", t_mode}, {"dt", t_dt},
                                {"sample_dt", t_sample_dt}, {"tau_syn", t_tau},
                                {"trials", t_trials}, {"duration", t_duration},
                                {"seed", t_seed}, {"i_offset", t_ioffset},
                                {"m_grid", m_grid}, {"s_grid", s_grid}};
            write_config_snapshot(dir, config_json);
            const auto samples = nsp::measure_tuning_curve(params, m_grid, s_grid, mode, config);
            nsp::write_tuning_csv(samples, (dir / "tuning.csv").string());

            // diagnostics of one representative trace at the requested resolution
            double s_diag = 0.0;
            for (double s : s_grid) if (s > 0.0) { s_diag = s; break; }
            if (mode == nsp::TuningMode::CurrentSource && s_diag > 0.0) {
                nsp::NoisyCurrentSpec spec{m_grid.front(), s_diag, t_sample_dt, t_seed};
                const auto trace = nsp::noisy_current(spec, t_duration, t_dt);
                const auto diag = nsp::trace_diagnostics(trace, 50.0);
                nsp::write_diagnostics_csv(diag, (dir / "trace").string());
            }
            json metrics = {{"samples", samples.size()}};
            write_metrics(dir / "metrics.json", metrics, config_json, timer.elapsed_s());
        }

        if (cal->parsed()) {
            nsp::LifParams params;
            params.tau_syn = c_tau;
            params.i_offset = c_ioffset;
            json config_json = {{"command", "calibrate"}, {"tau_syn", c_tau}, {"mode", c_mode},
                                {"dt", c_dt}, {"duration", c_duration}, {"trials", c_trials},
                                {"seed", c_seed}, {"i_offset", c_ioffset}};
            std::vector<nsp::TuningSample> samples;
            if (!c_samples.empty()) {
                std::ifstream in(c_samples);
                if (!in) throw std::runtime_error("cannot open " + c_samples);
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    nsp::TuningSample s;
                    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &s.m_i, &s.s_i, &s.rate,
                                    &s.rate_min, &s.rate_max) >= 3)
                        samples.push_back(s);
                }
            } else {
                nsp::TuningConfig config{c_duration, c_trials, c_dt, c_dt, 100, c_seed};
                const auto mode = c_mode == "current" ? nsp::TuningMode::CurrentSource
                                                      : nsp::TuningMode::PoissonEnsemble;
                samples = nsp::measure_tuning_curve(params, parse_grid(c_mgrid),
                                                    parse_grid(c_sgrid), mode, config);
            }
            const auto calib = nsp::calibrate(samples, c_tau);
            nsp::write_calibration_json(calib, c_out, config_json.dump());
            std::cout << "k=" << calib.k << " S=" << calib.s << " rmse=" << calib.fit_rmse
                      << " Hz\n";
        }

        if (trn->parsed()) {
            const fs::path dir(n_out);
            nsp::TrainConfig cfg;
            cfg.epochs = n_epochs;
            cfg.batch_size = n_batch;
            cfg.lr0 = n_lr0;
            cfg.lr_decay = n_decay;
            cfg.seed = n_seed;
            cfg.label_offset = n_offset;
            cfg.activation = make_activation(n_activation, n_k, n_fixed_sigma);
            cfg.scale = {n_s, n_tau};
            if (!n_calib.empty()) {
                const auto calib = nsp::read_calibration_json(n_calib);
                cfg.scale = {calib.s, calib.tau_syn};
                cfg.activation.k = calib.k;
            }
            json config_json = {{"command", "train"}, {"arch", n_arch},
                                {"activation", n_activation}, {"epochs", n_epochs},
                                {"batch", n_batch}, {"lr0", n_lr0}, {"lr_decay", n_decay},
                                {"seed", n_seed}, {"label_offset", n_offset},
                                {"k", cfg.activation.k}, {"s", cfg.scale.s},
                                {"tau_syn", cfg.scale.tau_syn}, {"subsample", n_sub}};
            write_config_snapshot(dir, config_json);
            auto data = nsp::load_idx(n_images, n_labels);
            if (n_sub > 0) data = nsp::subsample(data, n_sub, n_seed);
            const auto result = nsp::train(data, nsp::parse_arch(n_arch), cfg);
            nsp::save_weights(result.weights, (dir / "weights").string());
            nsp::write_loss_csv(result.loss_curve, (dir / "loss.csv").string());
            const double train_error = nsp::evaluate_ann(result.weights, data, cfg.activation);
            json metrics = {{"train_error", train_error},
                            {"final_loss", result.loss_curve.back().loss},
                            {"images", data.size()},
                            {"seed", n_seed}};
            write_metrics(dir / "metrics.json", metrics, config_json, timer.elapsed_s());
        }

        if (ft->parsed()) {
            const fs::path dir(f_out);
            const auto ws = nsp::load_weights(f_weights);
            nsp::TrainConfig cfg;
            cfg.epochs = f_epochs;
            cfg.batch_size = f_batch;
            cfg.lr0 = f_lr0;
            cfg.lr_decay = f_decay;
            cfg.seed = f_seed;
            cfg.label_offset = f_offset;
            cfg.activation = ws.activation;
            cfg.activation.kind = nsp::ActKind::NoisySoftplus;
            cfg.scale = ws.scale;
            if (!f_calib.empty()) {
                const auto calib = nsp::read_calibration_json(f_calib);
                cfg.scale = {calib.s, calib.tau_syn};
                cfg.activation.k = calib.k;
            }
            json config_json = {{"command", "finetune"}, {"weights", f_weights},
                                {"k", cfg.activation.k}, {"s", cfg.scale.s},
                                {"tau_syn", cfg.scale.tau_syn},
                                {"epochs", f_epochs}, {"batch", f_batch}, {"lr0", f_lr0},
                                {"lr_decay", f_decay}, {"label_offset", f_offset},
                                {"seed", f_seed}, {"subsample", f_sub}};
            write_config_snapshot(dir, config_json);
            auto data = nsp::load_idx(f_images, f_labels);
            if (f_sub > 0) data = nsp::subsample(data, f_sub, f_seed);
            const auto result = nsp::fine_tune(ws, data, cfg);
            nsp::save_weights(result.weights, (dir / "weights").string());
            nsp::write_loss_csv(result.loss_curve, (dir / "loss.csv").string());
            json metrics = {{"final_loss", result.loss_curve.back().loss},
                            {"images", data.size()}, {"seed", f_seed}};
            write_metrics(dir / "metrics.json", metrics, config_json, timer.elapsed_s());
        }

        if (ea->parsed()) {
            const fs::path dir(ea_out);
            const auto ws = nsp::load_weights(ea_weights);
            auto data = nsp::load_idx(ea_images, ea_labels);
            if (ea_sub > 0) data = nsp::subsample(data, ea_sub, ea_seed);
            json config_json = {{"command", "eval-ann"}, {"weights", ea_weights},
                                {"subsample", ea_sub}, {"seed", ea_seed},
                                {"activation", activation_name(ws.activation)}};
            write_config_snapshot(dir, config_json);
            const double error = nsp::evaluate_ann(ws, data, ws.activation);
            json metrics = {{"error_rate", error}, {"images", data.size()}, {"seed", ea_seed}};
            write_metrics(dir / "metrics.json", metrics, config_json, timer.elapsed_s());
            std::cout << "ann error " << error * 100.0 << "%\n";
        }

        if (es->parsed()) {
            const fs::path dir(es_out);
            const auto ws = nsp::load_weights(es_weights);
            auto data = nsp::load_idx(es_images, es_labels);
            if (es_sub > 0) data = nsp::subsample(data, es_sub, es_seed);
            nsp::LifParams params;
            params.tau_syn = ws.scale.tau_syn;
            params.i_offset = es_ioffset;
            json config_json = {{"command", "eval-snn"}, {"weights", es_weights},
                                {"duration", es_duration}, {"dt", es_dt},
                                {"i_offset", es_ioffset}, {"subsample", es_sub},
                                {"seed", es_seed}, {"threads", es_threads},
                                {"checkpoints", es_checkpoints}};
            write_config_snapshot(dir, config_json);
            const auto net = nsp::build_snn(ws, params);
            const auto eval = nsp::evaluate_snn(net, data, es_duration, es_dt, es_seed,
                                                parse_grid(es_checkpoints), es_threads);
            const double ann_error = nsp::evaluate_ann(ws, data, ws.activation);
            nsp::write_accuracy_csv(eval, (dir / "accuracy_vs_time.csv").string());
            json metrics = {{"snn_error", eval.error_rate},
                            {"ann_error", ann_error},
                            {"accuracy_drop", eval.error_rate - ann_error},
                            {"total_synaptic_events", eval.total_synaptic_events},
                            {"images", data.size()},
                            {"seed", es_seed}};
            write_metrics(dir / "metrics.json", metrics, config_json, timer.elapsed_s());
            std::cout << "snn error " << eval.error_rate * 100.0 << "% (ann "
                      << ann_error * 100.0 << "%)\n";
        }

        if (en->parsed()) {
            const auto report = nsp::energy_from_event_rate(en_events, en_duration, en_esyn);
            json j = {{"joules", report.joules},
                      {"watts", report.watts},
                      {"events_per_sec", report.events_per_sec},
                      {"duration_s", en_duration},
                      {"e_syn_nj", en_esyn}};
            if (en_out.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::ofstream out(en_out);
                if (!out) throw std::runtime_error("cannot open " + en_out);
                out << j.dump(2) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

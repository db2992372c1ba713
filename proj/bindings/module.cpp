#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsp/activations.hpp"
#include "nsp/annet.hpp"
#include "nsp/dataio.hpp"
#include "nsp/response.hpp"
#include "nsp/snn.hpp"
#include "nsp/stimulus.hpp"

namespace py = pybind11;
using namespace nsp;

PYBIND11_MODULE(_nsp, m) {
    m.doc() = "Noisy-Softplus LIF toolkit core";

    py::class_<LifParams>(m, "LifParams")
        .def(py::init<>())
        .def_readwrite("c_m", &LifParams::c_m)
        .def_readwrite("tau_m", &LifParams::tau_m)
        .def_readwrite("tau_refrac", &LifParams::tau_refrac)
        .def_readwrite("v_reset", &LifParams::v_reset)
        .def_readwrite("v_rest", &LifParams::v_rest)
        .def_readwrite("v_thresh", &LifParams::v_thresh)
        .def_readwrite("i_offset", &LifParams::i_offset)
        .def_readwrite("tau_syn", &LifParams::tau_syn)
        .def("r_m", &LifParams::r_m)
        .def("rheobase", &LifParams::rheobase);

    py::class_<DiffusionStats>(m, "DiffusionStats")
        .def(py::init<double, double>(), py::arg("mu"), py::arg("sigma"))
        .def_readwrite("mu", &DiffusionStats::mu)
        .def_readwrite("sigma", &DiffusionStats::sigma);

    py::class_<Calibration>(m, "Calibration")
        .def(py::init<>())
        .def_readwrite("k", &Calibration::k)
        .def_readwrite("s", &Calibration::s)
        .def_readwrite("tau_syn", &Calibration::tau_syn)
        .def_readwrite("fit_rmse", &Calibration::fit_rmse);

    py::class_<TuningSample>(m, "TuningSample")
        .def(py::init<>())
        .def_readwrite("m_i", &TuningSample::m_i)
        .def_readwrite("s_i", &TuningSample::s_i)
        .def_readwrite("rate", &TuningSample::rate)
        .def_readwrite("rate_min", &TuningSample::rate_min)
        .def_readwrite("rate_max", &TuningSample::rate_max);

    py::class_<CurrentStats>(m, "CurrentStats")
        .def_readonly("mean", &CurrentStats::mean)
        .def_readonly("variance", &CurrentStats::variance);

    m.def("noisy_softplus", &noisy_softplus, py::arg("x"), py::arg("sigma"), py::arg("k"));
    m.def("noisy_softplus_grad", &noisy_softplus_grad, py::arg("x"), py::arg("sigma"),
          py::arg("k"));
    m.def("rate_constant_current", &rate_constant_current, py::arg("params"), py::arg("i_nA"));
    m.def("current_stats_to_diffusion", &current_stats_to_diffusion, py::arg("m_i"),
          py::arg("s_i"), py::arg("dt"), py::arg("params"));
    m.def("siegert_rate", &siegert_rate, py::arg("params"), py::arg("stats"));
    m.def(
        "poisson_train",
        [](double rate, double duration, double dt, std::uint64_t seed) {
            return poisson_train(rate, duration, dt, seed).times;
        },
        py::arg("rate_hz"), py::arg("duration_ms"), py::arg("dt_ms"), py::arg("seed"));
    m.def(
        "ensemble_stats",
        [](const std::vector<double>& weights, const std::vector<double>& rates,
           double tau_syn) {
            PoissonEnsembleSpec spec;
            spec.weights = weights;
            spec.rates = rates;
            return ensemble_to_stats(spec, tau_syn);
        },
        py::arg("weights"), py::arg("rates"), py::arg("tau_syn"));
    m.def(
        "stats_to_rates",
        [](double m, double s, double tau_syn, int count, double split, double w) {
            const auto spec = stats_to_ensemble(m, s, tau_syn, count, split, w);
            return py::make_tuple(spec.weights, spec.rates);
        },
        py::arg("m_i"), py::arg("s_i"), py::arg("tau_syn"), py::arg("count"),
        py::arg("split") = 0.5, py::arg("weight_magnitude") = 0.0);
    m.def("calibrate", &calibrate, py::arg("samples"), py::arg("tau_syn"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "energy_estimate",
        [](double events_per_sec, double duration_s, double e_syn_nj) {
            const auto r = energy_from_event_rate(events_per_sec, duration_s, e_syn_nj);
            return py::make_tuple(r.joules, r.watts, r.events_per_sec);
        },
        py::arg("events_per_sec"), py::arg("duration_s"), py::arg("e_syn_nj") = 8.0);
    m.def(
        "simulate_constant_current",
        [](const LifParams& params, double i_nA, double duration, double dt) {
            CurrentTrace trace;
            trace.dt = dt;
            trace.samples.assign(static_cast<std::size_t>(duration / dt), i_nA);
            return simulate_neuron(params, trace, duration, dt).rate_hz();
        },
        py::arg("params"), py::arg("i_nA"), py::arg("duration_ms"), py::arg("dt_ms"),
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "evaluate_weights",
        [](const std::string& base_path, const std::string& images, const std::string& labels,
           std::size_t subsample_n, std::uint64_t seed) {
            const auto ws = load_weights(base_path);
            auto data = load_idx(images, labels);
            if (subsample_n > 0) data = subsample(data, subsample_n, seed);
            return evaluate_ann(ws, data, ws.activation);
        },
        py::arg("weights_base"), py::arg("images"), py::arg("labels"),
        py::arg("subsample") = 0, py::arg("seed") = 1,
        py::call_guard<py::gil_scoped_release>());
}

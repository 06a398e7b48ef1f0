#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qxs/benchmarks.hpp"
#include "qxs/device.hpp"
#include "qxs/experiments.hpp"
#include "qxs/idt.hpp"
#include "qxs/noise.hpp"
#include "qxs/rl.hpp"
#include "qxs/simulate.hpp"
#include "qxs/spectator.hpp"

namespace py = pybind11;

namespace {

qxs::NoiseSpec spec_from_name(const std::string& name,
                              const std::string& model_json, int qubits) {
    if (name == "none") return qxs::NoiseSpec::none();
    if (name == "crosstalk") {
        return qxs::NoiseSpec::with_crosstalk(
            qxs::CrosstalkModel::from_json(model_json, qubits));
    }
    throw std::invalid_argument("noise must be 'none' or 'crosstalk'");
}

}  // namespace

PYBIND11_MODULE(_qxs, m) {
    m.doc() = "Density-matrix simulator with crosstalk noise models";

    py::class_<qxs::Circuit>(m, "Circuit")
        .def_property_readonly("qubits", &qxs::Circuit::qubits)
        .def_property_readonly("cbits", &qxs::Circuit::cbits)
        .def_property_readonly("depth", &qxs::Circuit::depth)
        .def("gate_count", &qxs::Circuit::gate_count)
        .def("to_json", &qxs::Circuit::to_json)
        .def_static("from_json", &qxs::Circuit::from_json);

    m.def("build_benchmark", &qxs::build_benchmark, py::arg("name"));

    m.def(
        "simulate_counts",
        [](const qxs::Circuit& c, const std::string& noise,
           const std::string& model_json, long long shots,
           std::uint64_t seed) {
            return qxs::simulate_counts(
                c, spec_from_name(noise, model_json, c.qubits()), shots, seed);
        },
        py::arg("circuit"), py::arg("noise") = "none",
        py::arg("model_json") = "", py::arg("shots") = 1024,
        py::arg("seed") = 1);

    m.def("tvd",
          [](const qxs::Counts& p, const qxs::Counts& q) {
              return qxs::tvd(p, q);
          },
          py::arg("p"), py::arg("q"));
    m.def("tvd_to_uniform", [](const qxs::Counts& p, int bits) {
        return qxs::tvd(p, qxs::uniform_distribution(bits));
    });

    m.def("bundled_device_json",
          []() { return qxs::device_to_json(qxs::bundled_device()); });
    m.def("default_device_model_json", []() {
        qxs::Device dev = qxs::bundled_device();
        return qxs::default_device_model(dev.topology, dev.calibration)
            .to_json();
    });
    m.def(
        "synth_model_json",
        [](int path_qubits, double alpha, double beta, int cutoff) {
            return qxs::synth_default_model(
                       qxs::DeviceTopology::path(path_qubits), alpha, beta,
                       cutoff)
                .to_json();
        },
        py::arg("path_qubits"), py::arg("alpha"), py::arg("beta"),
        py::arg("cutoff") = 3);

    m.def(
        "placed_fidelity",
        [](const qxs::Circuit& victim, const std::vector<int>& placement,
           std::optional<std::pair<int, int>> attack,
           const std::string& model_json) {
            qxs::Device dev = qxs::bundled_device();
            qxs::CrosstalkModel model = qxs::CrosstalkModel::from_json(
                model_json, dev.topology.qubit_count);
            return qxs::placed_fidelity(victim, placement, attack, model,
                                        dev.topology);
        },
        py::arg("victim"), py::arg("placement"),
        py::arg("attack") = std::nullopt, py::arg("model_json"));

    m.def(
        "attack_demo",
        [](const std::string& target, long long shots, std::uint64_t seed) {
            qxs::AttackDemoResult r = qxs::run_attack_demo(target, shots, seed);
            py::dict out;
            out["clean"] = r.clean;
            out["attacked"] = r.attacked;
            out["clean_success"] = r.clean_success;
            out["tvd_to_uniform"] = r.tvd_to_uniform;
            return out;
        },
        py::arg("target") = "110", py::arg("shots") = 4096,
        py::arg("seed") = 1);

    m.def(
        "idt_roundtrip_entry",
        [](const std::string& model_json, int path_qubits,
           std::pair<int, int> driven, long long shots, std::uint64_t seed) {
            qxs::DeviceTopology topo = qxs::DeviceTopology::path(path_qubits);
            qxs::CrosstalkModel model =
                qxs::CrosstalkModel::from_json(model_json, path_qubits);
            std::vector<int> lengths{1, 2, 4, 8, 16};
            qxs::IdtSuite base = qxs::generate_idt_suite(
                topo, {}, lengths, qxs::default_bases());
            qxs::IdtSuite drv = qxs::generate_idt_suite(
                topo, driven, lengths, qxs::default_bases());
            qxs::NoiseSpec spec = qxs::NoiseSpec::with_crosstalk(model);
            qxs::RateEstimate eb = qxs::estimate_hsa(
                base, qxs::run_suite(base, spec, shots, seed));
            qxs::RateEstimate ed = qxs::estimate_hsa(
                drv, qxs::run_suite(drv, spec, shots, seed + 1));
            qxs::CrosstalkModel rebuilt;
            rebuilt.gates[qxs::gate_key(qxs::GateKind::CNOT, driven.first,
                                        driven.second)] =
                qxs::build_crosstalk_entry(eb, ed);
            return rebuilt.to_json();
        },
        py::arg("model_json"), py::arg("path_qubits"), py::arg("driven"),
        py::arg("shots") = 10000, py::arg("seed") = 7);

    m.def(
        "spectator_sweep",
        [](const std::vector<int>& taus, long long shots, std::uint64_t seed) {
            qxs::Device dev = qxs::bundled_device();
            qxs::CrosstalkModel model =
                qxs::default_device_model(dev.topology, dev.calibration);
            qxs::SpectatorConfig config;
            config.shots = shots;
            config.seed = seed;
            qxs::TauSweep sweep = qxs::sweep_waiting_time(
                config, model, dev.topology, taus);
            py::dict out;
            out["points"] = sweep.points;
            out["best_tau"] = sweep.best_tau;
            out["best_eta"] = sweep.best_eta;
            return out;
        },
        py::arg("taus"), py::arg("shots") = 200, py::arg("seed") = 1);
}

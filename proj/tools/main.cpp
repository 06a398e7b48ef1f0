// Command-line entry point: every experiment in the library behind one
// binary, with JSON config files, seeded determinism and a run manifest
// written next to every output so results can be replayed bit-for-bit.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qxs/benchmarks.hpp"
#include "qxs/device.hpp"
#include "qxs/experiments.hpp"
#include "qxs/idt.hpp"
#include "qxs/noise.hpp"
#include "qxs/rl.hpp"
#include "qxs/simulate.hpp"
#include "qxs/spectator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 usage, 2 bad input data, 3 runtime failure.
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

// ---------------------------------------------------------------------------
// small IO helpers

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Write-then-rename so a crashed run never leaves a half-written output.
void write_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write file: " + path);
        out << content;
        if (!out) throw std::runtime_error("short write: " + path);
    }
    fs::rename(tmp, target);
}

qxs::Device resolve_device(const std::string& path) {
    if (!path.empty()) return qxs::load_device(path);
    if (const char* env = std::getenv("QXS_DEVICE")) {
        if (env[0] != '\0') return qxs::load_device(env);
    }
    return qxs::bundled_device();
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    // Either "a..b" (inclusive range) or a comma-separated list.
    auto dots = text.find("..");
    if (dots != std::string::npos) {
        int lo = std::stoi(text.substr(0, dots));
        int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty range: " + text);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: " + text);
    return out;
}

std::pair<int, int> parse_pair(const std::string& text) {
    std::vector<int> v = parse_int_list(text);
    if (v.size() != 2) throw std::invalid_argument("expected a pair: " + text);
    return {v[0], v[1]};
}

qxs::NoiseSpec resolve_noise(const std::string& noise, int qubits) {
    if (noise.empty() || noise == "none") return qxs::NoiseSpec::none();
    if (noise == "demo") {
        qxs::CrosstalkModel demo = qxs::attack_demo_model();
        if (qubits < 5) {
            std::vector<int> keep;
            for (int q = 0; q < qubits; ++q) keep.push_back(q);
            demo = demo.restricted(keep);
        }
        return qxs::NoiseSpec::with_crosstalk(demo);
    }
    // Anything else is a model file.
    return qxs::NoiseSpec::with_crosstalk(
        qxs::CrosstalkModel::from_json(read_file(noise), qubits));
}

// ---------------------------------------------------------------------------
// runner registry and manifests
//
// Every subcommand resolves its parameters into one flat JSON config and
// calls a named runner with it. The manifest records the runner name and the
// config; `replay` feeds them back through the same entry point, so a
// replayed run cannot drift from the original code path.

struct RunOutcome {
    // Config keys whose values are files this run wrote.
    std::vector<std::string> output_keys;
};

using Runner = std::function<RunOutcome(const json&)>;

std::map<std::string, Runner>& runners() {
    static std::map<std::string, Runner> reg;
    return reg;
}

void write_manifests(const std::string& command, const json& config,
                     const RunOutcome& outcome, double wall_seconds) {
    ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["output_keys"] = outcome.output_keys;
    ordered_json outputs = ordered_json::object();
    for (const std::string& key : outcome.output_keys) {
        outputs[key] = config.at(key).get<std::string>();
    }
    manifest["outputs"] = outputs;
    manifest["wall_seconds"] = wall_seconds;
    for (const std::string& key : outcome.output_keys) {
        std::string path = config.at(key).get<std::string>() + ".manifest.json";
        write_atomic(path, manifest.dump(2) + "\n");
    }
}

int dispatch(const std::string& command, const json& config) {
    auto it = runners().find(command);
    if (it == runners().end()) {
        throw std::invalid_argument("unknown command: " + command);
    }
    auto start = std::chrono::steady_clock::now();
    RunOutcome outcome = it->second(config);
    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    write_manifests(command, config, outcome, wall);
    return 0;
}

// ---------------------------------------------------------------------------
// flag/config-file merging: flags win, then the JSON config file, then the
// built-in defaults the variables already hold.

class ParamSet {
  public:
    explicit ParamSet(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", config_path_,
                        "JSON config file; explicit flags take precedence");
    }

    template <typename T>
    CLI::Option* add(const std::string& flag, T& var, const std::string& key,
                     const std::string& help) {
        CLI::Option* opt = cmd_->add_option(flag, var, help);
        appliers_.push_back([opt, &var, key](const json& j) {
            if (opt->count() == 0 && j.contains(key)) {
                var = j.at(key).get<T>();
            }
        });
        collectors_.push_back(
            [&var, key](json& j) { j[key] = var; });
        return opt;
    }

    CLI::Option* add_flag(const std::string& flag, bool& var,
                          const std::string& key, const std::string& help) {
        CLI::Option* opt = cmd_->add_flag(flag, var, help);
        appliers_.push_back([opt, &var, key](const json& j) {
            if (opt->count() == 0 && j.contains(key)) {
                var = j.at(key).get<bool>();
            }
        });
        collectors_.push_back([&var, key](json& j) { j[key] = var; });
        return opt;
    }

    /// Resolved config after the file merge; also re-syncs the bound
    /// variables, so runners can read either.
    json resolve() {
        if (!config_path_.empty()) {
            json file = json::parse(read_file(config_path_));
            for (auto& apply : appliers_) apply(file);
        }
        json out;
        for (auto& collect : collectors_) collect(out);
        return out;
    }

  private:
    CLI::App* cmd_;
    std::string config_path_;
    std::vector<std::function<void(const json&)>> appliers_;
    std::vector<std::function<void(json&)>> collectors_;
};

// ---------------------------------------------------------------------------
// runners

RunOutcome run_device_show(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    dev.topology.validate();
    dev.calibration.validate(dev.topology);
    std::cout << dev.topology.name << ": " << dev.topology.qubit_count
              << " qubits, " << dev.topology.edges.size() << " couplers\n";
    int dead = 0;
    for (const auto& [a, b] : dev.topology.edges) {
        if (dev.calibration.edge_is_dead(a, b)) ++dead;
    }
    std::cout << "dead couplers: " << dead << "\n";
    for (int q = 0; q < dev.topology.qubit_count; ++q) {
        std::cout << "q" << q << ": T1 " << dev.calibration.t1_us[q]
                  << " us, T2 " << dev.calibration.t2_us[q] << " us, neighbors";
        for (int n : dev.topology.neighbors(q)) std::cout << ' ' << n;
        std::cout << "\n";
    }
    RunOutcome out;
    std::string path = cfg.value("out", "");
    if (!path.empty()) {
        write_atomic(path, qxs::device_to_json(dev));
        out.output_keys.push_back("out");
    }
    return out;
}

RunOutcome run_model_synth(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::CrosstalkModel model;
    if (cfg.value("calibrated", false)) {
        qxs::DefaultModelParams p = qxs::default_model_params();
        p.alpha = cfg.value("alpha", p.alpha);
        p.beta = cfg.value("beta", p.beta);
        p.cutoff = cfg.value("cutoff", p.cutoff);
        model = qxs::device_model_with_params(dev.topology, dev.calibration, p);
    } else {
        model = qxs::synth_default_model(dev.topology, cfg.at("alpha"),
                                         cfg.at("beta"), cfg.at("cutoff"));
    }
    model.validate(dev.topology.qubit_count);
    write_atomic(cfg.at("out"), model.to_json() + "\n");
    return {{"out"}};
}

RunOutcome run_idt_gen(const json& cfg) {
    // Tomography simulates the whole register exactly, so suites live on
    // small graphs; --path sidesteps the full device.
    int path = cfg.value("path", 0);
    qxs::Device dev;
    if (path > 0) {
        dev.topology = qxs::DeviceTopology::path(path);
    } else {
        dev = resolve_device(cfg.value("device", ""));
    }
    std::optional<std::pair<int, int>> driven;
    std::string driven_text = cfg.value("driven", "");
    if (!driven_text.empty()) driven = parse_pair(driven_text);
    std::vector<int> lengths = parse_int_list(cfg.value("lengths", "1,2,4,8,16"));
    std::vector<int> tomography;
    std::string tomo_text = cfg.value("tomography", "");
    qxs::IdtSuite suite;
    if (tomo_text.empty()) {
        suite = qxs::generate_idt_suite(dev.topology, driven, lengths,
                                        qxs::default_bases());
    } else {
        suite = qxs::generate_idt_suite(dev.topology, driven, lengths,
                                        qxs::default_bases(),
                                        parse_int_list(tomo_text));
    }
    write_atomic(cfg.at("out"), suite.to_json() + "\n");
    return {{"out"}};
}

RunOutcome run_idt_run(const json& cfg) {
    qxs::IdtSuite suite = qxs::IdtSuite::from_json(read_file(cfg.at("suite")));
    qxs::NoiseSpec spec =
        resolve_noise(cfg.value("noise", "none"), suite.qubit_count);
    std::vector<qxs::Counts> results =
        qxs::run_suite(suite, spec, cfg.value("shots", 10000LL),
                       cfg.value("seed", std::uint64_t{1}),
                       cfg.value("workers", 0));
    ordered_json doc = ordered_json::array();
    for (const qxs::Counts& c : results) {
        doc.push_back(ordered_json::parse(qxs::counts_to_json(c)));
    }
    write_atomic(cfg.at("out"), doc.dump(2) + "\n");
    return {{"out"}};
}

RunOutcome run_idt_fit(const json& cfg) {
    qxs::IdtSuite suite = qxs::IdtSuite::from_json(read_file(cfg.at("suite")));
    json doc = json::parse(read_file(cfg.at("results")));
    if (!doc.is_array() || doc.size() != suite.experiments.size()) {
        throw std::invalid_argument("results do not match the suite size");
    }
    std::vector<qxs::Counts> results;
    for (const json& entry : doc) {
        results.push_back(qxs::counts_from_json(entry.dump()));
    }
    qxs::RateEstimate est = qxs::estimate_hsa(suite, results);
    write_atomic(cfg.at("out"), qxs::estimate_to_json(est) + "\n");
    return {{"out"}};
}

RunOutcome run_bench(const json& cfg) {
    qxs::Circuit circuit = qxs::build_benchmark(cfg.at("circuit"));
    qxs::NoiseSpec spec =
        resolve_noise(cfg.value("noise", "none"), circuit.qubits());
    qxs::Counts counts = qxs::simulate_counts(
        circuit, spec, cfg.value("shots", 8192LL),
        cfg.value("seed", std::uint64_t{1}));
    write_atomic(cfg.at("out"), qxs::counts_to_json(counts) + "\n");
    return {{"out"}};
}

RunOutcome run_bench_attack(const json& cfg) {
    qxs::AttackDemoResult demo = qxs::run_attack_demo(
        cfg.value("target", "110"), cfg.value("shots", 8192LL),
        cfg.value("seed", std::uint64_t{1}));
    ordered_json doc;
    doc["target"] = cfg.value("target", "110");
    doc["clean"] = ordered_json::parse(qxs::counts_to_json(demo.clean));
    doc["attacked"] = ordered_json::parse(qxs::counts_to_json(demo.attacked));
    doc["clean_success"] = demo.clean_success;
    doc["tvd_to_uniform"] = demo.tvd_to_uniform;
    write_atomic(cfg.at("out"), doc.dump(2) + "\n");
    return {{"out"}};
}

RunOutcome run_separation_sweep(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::CrosstalkModel model;
    std::string model_path = cfg.value("model", "");
    if (model_path.empty()) {
        model = qxs::default_device_model(dev.topology, dev.calibration);
    } else {
        model = qxs::CrosstalkModel::from_json(read_file(model_path),
                                               dev.topology.qubit_count);
    }
    qxs::Circuit victim =
        qxs::build_benchmark(cfg.value("victim", "grover3"));
    qxs::Placement place = parse_int_list(cfg.value("place", "12,13,14"));
    std::vector<int> radii = parse_int_list(cfg.value("radii", "0,1,2,3"));
    qxs::SweepResult sweep = qxs::run_separation_sweep(
        victim, place, radii, model, dev.topology, &dev.calibration,
        cfg.value("workers", 0));
    write_atomic(cfg.at("out"), qxs::sweep_to_csv(sweep));
    return {{"out"}};
}

qxs::RlConfig rl_config_from_json(const json& cfg) {
    qxs::RlConfig rl;
    rl.hidden = cfg.value("hidden", rl.hidden);
    rl.actions = cfg.value("actions", rl.actions);
    rl.learning_rate = cfg.value("lr", rl.learning_rate);
    rl.batch = cfg.value("batch", rl.batch);
    rl.seed = cfg.value("seed", rl.seed);
    rl.max_qubits = cfg.value("max_qubits", rl.max_qubits);
    rl.max_gates = cfg.value("max_gates", rl.max_gates);
    rl.validate();
    return rl;
}

std::string curve_to_csv(const std::vector<std::pair<int, double>>& curve) {
    std::ostringstream out;
    out << "episode,mean_reward\n";
    out.precision(10);
    for (const auto& [ep, r] : curve) out << ep << ',' << r << '\n';
    return out.str();
}

RunOutcome run_rl_train(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::CrosstalkModel model =
        qxs::default_device_model(dev.topology, dev.calibration);
    qxs::RlConfig rl = rl_config_from_json(cfg);
    std::vector<qxs::Circuit> circuits = qxs::gen_training_circuits(
        cfg.value("circuits", 5000), rl.max_qubits, rl.max_gates,
        qxs::default_gate_set(), rl.seed);
    qxs::TrainResult result = qxs::train(rl, circuits, model, dev.topology,
                                         cfg.value("workers", 0));
    RunOutcome out;
    write_atomic(cfg.at("out"), result.policy.to_json() + "\n");
    out.output_keys.push_back("out");
    std::string curve = cfg.value("curve", "");
    if (!curve.empty()) {
        write_atomic(curve, curve_to_csv(result.curve));
        out.output_keys.push_back("curve");
    }
    return out;
}

RunOutcome run_rl_finetune(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::CrosstalkModel model;
    std::string model_path = cfg.value("model", "");
    if (model_path.empty()) {
        model = qxs::default_device_model(dev.topology, dev.calibration);
    } else {
        model = qxs::CrosstalkModel::from_json(read_file(model_path),
                                               dev.topology.qubit_count);
    }
    qxs::PolicyNetwork policy =
        qxs::PolicyNetwork::from_json(read_file(cfg.at("policy")));
    qxs::RlConfig rl = rl_config_from_json(cfg);
    rl.actions = policy.actions();
    rl.hidden = policy.hidden();
    std::vector<qxs::Circuit> circuits = qxs::gen_training_circuits(
        cfg.value("circuits", 5000), rl.max_qubits, rl.max_gates,
        qxs::default_gate_set(), rl.seed);
    qxs::TrainResult result = qxs::fine_tune(policy, rl, circuits, model,
                                             dev.topology,
                                             cfg.value("workers", 0));
    write_atomic(cfg.at("out"), result.policy.to_json() + "\n");
    return {{"out"}};
}

RunOutcome run_rl_map(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::PolicyNetwork policy =
        qxs::PolicyNetwork::from_json(read_file(cfg.at("policy")));
    qxs::Circuit circuit = qxs::Circuit::from_json(read_file(cfg.at("circuit")));
    qxs::RlConfig rl = rl_config_from_json(cfg);
    // The candidate count is a property of the trained policy, not a knob.
    rl.actions = policy.actions();
    rl.hidden = policy.hidden();
    qxs::Placement place = qxs::predict(policy, circuit, dev.topology, rl);
    ordered_json doc;
    doc["placement"] = place;
    std::cout << doc.dump() << "\n";
    RunOutcome out;
    std::string path = cfg.value("out", "");
    if (!path.empty()) {
        write_atomic(path, doc.dump(2) + "\n");
        out.output_keys.push_back("out");
    }
    return out;
}

qxs::SpectatorConfig spectator_config_from_json(const json& cfg) {
    qxs::SpectatorConfig sc;
    sc.shots = cfg.value("shots", 1000LL);
    sc.seed = cfg.value("seed", std::uint64_t{1});
    sc.tau = cfg.value("tau-star", sc.tau);
    sc.attack_fraction = cfg.value("attack-frac", sc.attack_fraction);
    sc.meas_flip = cfg.value("flip", sc.meas_flip);
    sc.duration = cfg.value("duration", sc.duration);
    sc.attack_scale = cfg.value("scale", sc.attack_scale);
    return sc;
}

RunOutcome run_spectator_sweep(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::CrosstalkModel model =
        qxs::default_device_model(dev.topology, dev.calibration);
    qxs::SpectatorConfig sc = spectator_config_from_json(cfg);
    sc.validate();
    std::vector<int> taus = parse_int_list(cfg.value("tau", "1..20"));
    qxs::TauSweep sweep = qxs::sweep_waiting_time(
        sc, model, dev.topology, taus, cfg.value("workers", 0));
    write_atomic(cfg.at("out"), qxs::sweep_to_csv(sweep));
    std::cout << "best tau " << sweep.best_tau << " eta " << sweep.best_eta
              << "\n";
    return {{"out"}};
}

RunOutcome run_spectator_postselect(const json& cfg) {
    qxs::Device dev = resolve_device(cfg.value("device", ""));
    qxs::CrosstalkModel model =
        qxs::default_device_model(dev.topology, dev.calibration);
    qxs::SpectatorConfig sc = spectator_config_from_json(cfg);
    sc.data = {8, 11};
    sc.validate();
    qxs::PostSelectResult r =
        qxs::post_select(sc, model, dev.topology, cfg.value("workers", 0));
    ordered_json doc;
    doc["all"] = r.all;
    doc["retained"] = r.retained;
    doc["total_shots"] = r.total_shots;
    doc["discarded_shots"] = r.discarded_shots;
    doc["retained_fraction"] = r.retained_fraction;
    doc["clean_retained_fraction"] = r.clean_retained_fraction;
    doc["all_discarded"] = r.all_discarded;
    write_atomic(cfg.at("out"), doc.dump(2) + "\n");
    return {{"out"}};
}

void register_runners() {
    auto& reg = runners();
    reg["device show"] = run_device_show;
    reg["model synth"] = run_model_synth;
    reg["idt gen"] = run_idt_gen;
    reg["idt run"] = run_idt_run;
    reg["idt fit"] = run_idt_fit;
    reg["bench run"] = run_bench;
    reg["bench attack"] = run_bench_attack;
    reg["separation sweep"] = run_separation_sweep;
    reg["rl train"] = run_rl_train;
    reg["rl finetune"] = run_rl_finetune;
    reg["rl map"] = run_rl_map;
    reg["spectator sweep"] = run_spectator_sweep;
    reg["spectator postselect"] = run_spectator_postselect;
}

// ---------------------------------------------------------------------------
// replay

int run_replay(const std::string& manifest_path, const std::string& out_dir,
               std::optional<int> workers) {
    json manifest = json::parse(read_file(manifest_path));
    std::string command = manifest.at("command").get<std::string>();
    json config = manifest.at("config");
    if (workers) config["workers"] = *workers;
    if (!out_dir.empty()) {
        for (const json& key : manifest.at("output_keys")) {
            std::string k = key.get<std::string>();
            fs::path original(config.at(k).get<std::string>());
            config[k] = (fs::path(out_dir) / original.filename()).string();
        }
    }
    return dispatch(command, config);
}

// ---------------------------------------------------------------------------
// CLI wiring

struct PendingRun {
    std::string command;
    ParamSet* params = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    register_runners();

    CLI::App app{"Crosstalk noise simulation and defence experiments"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<ParamSet>> params;
    std::vector<PendingRun> pending;

    auto make = [&](CLI::App* parent, const std::string& name,
                    const std::string& help,
                    const std::string& command) -> ParamSet* {
        CLI::App* cmd = parent->add_subcommand(name, help);
        params.push_back(std::make_unique<ParamSet>(cmd));
        ParamSet* set = params.back().get();
        cmd->callback([&pending, set, command] {
            pending.push_back({command, set});
        });
        return set;
    };

    std::string device_path, out_path, model_path, noise = "none";
    std::string circuit = "grover3", target = "110";
    std::string driven, lengths = "1,2,4,8,16", tomography;
    std::string suite_path, results_path, policy_path, circuit_path;
    std::string victim = "grover3", place = "12,13,14", radii = "0,1,2,3";
    std::string taus = "1..20", curve_path;
    long long shots = 8192;
    int path_qubits = 0;
    std::uint64_t seed = 1;
    int workers = 0, circuits = 5000, hidden = 64, actions = 16, batch = 50;
    int tau_star = 7, duration = 100;
    double alpha = 0.02, beta = 0.4, lr = 0.05;
    int cutoff = 3;
    bool calibrated = false;
    double attack_frac = 1.0, flip = 0.01, scale = 0.0;
    scale = qxs::default_spectator_attack_scale();

    // device
    CLI::App* device = app.add_subcommand("device", "device inspection");
    device->require_subcommand(1);
    {
        ParamSet* p = make(device, "show", "print topology and calibration",
                           "device show");
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--out", out_path, "out", "write the device JSON here");
    }

    // model
    CLI::App* model = app.add_subcommand("model", "crosstalk models");
    model->require_subcommand(1);
    {
        ParamSet* p = make(model, "synth", "synthesize a distance-decay model",
                           "model synth");
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--alpha", alpha, "alpha", "adjacent-victim magnitude");
        p->add("--beta", beta, "beta", "decay per extra graph distance");
        p->add("--cutoff", cutoff, "cutoff", "maximum victim distance");
        p->add_flag("--calibrated", calibrated, "calibrated",
                    "weight edges by the device calibration");
        p->add("--out", out_path, "out", "model JSON output")->required();
    }

    // idt
    CLI::App* idt = app.add_subcommand("idt", "idle tomography");
    idt->require_subcommand(1);
    {
        ParamSet* p = make(idt, "gen", "generate a tomography suite",
                           "idt gen");
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--path", path_qubits, "path",
               "use a path graph of this many qubits instead of a device");
        p->add("--driven", driven, "driven", "driven coupler, e.g. 12,13");
        p->add("--lengths", lengths, "lengths", "idle repetition counts");
        p->add("--tomography", tomography, "tomography",
               "explicit tomography qubits");
        p->add("--out", out_path, "out", "suite JSON output")->required();
    }
    {
        ParamSet* p = make(idt, "run", "simulate a tomography suite",
                           "idt run");
        p->add("--suite", suite_path, "suite", "suite JSON file")->required();
        p->add("--noise", noise, "noise", "none, demo or a model JSON file");
        p->add("--shots", shots, "shots", "shots per circuit");
        p->add("--seed", seed, "seed", "master seed");
        p->add("--workers", workers, "workers", "parallel workers (0 = auto)");
        p->add("--out", out_path, "out", "counts JSON output")->required();
    }
    {
        ParamSet* p = make(idt, "fit", "fit HSA rates from suite results",
                           "idt fit");
        p->add("--suite", suite_path, "suite", "suite JSON file")->required();
        p->add("--results", results_path, "results", "counts JSON from idt run")
            ->required();
        p->add("--out", out_path, "out", "estimate JSON output")->required();
    }

    // bench
    CLI::App* bench = app.add_subcommand("bench", "benchmark circuits");
    bench->require_subcommand(1);
    {
        ParamSet* p = make(bench, "run", "simulate a benchmark circuit",
                           "bench run");
        p->add("--circuit", circuit, "circuit",
               "grover3[:target], syn_<n>, toffoli_<n>, attack[:target]");
        p->add("--noise", noise, "noise", "none, demo or a model JSON file");
        p->add("--shots", shots, "shots", "sampled shots");
        p->add("--seed", seed, "seed", "master seed");
        p->add("--out", out_path, "out", "counts JSON output")->required();
    }
    {
        ParamSet* p = make(bench, "attack", "clean-vs-attacked demonstration",
                           "bench attack");
        p->add("--target", target, "target", "3-bit Grover target");
        p->add("--shots", shots, "shots", "sampled shots per scenario");
        p->add("--seed", seed, "seed", "master seed");
        p->add("--out", out_path, "out", "report JSON output")->required();
    }

    // separation
    CLI::App* separation =
        app.add_subcommand("separation", "circuit separation defence");
    separation->require_subcommand(1);
    {
        ParamSet* p = make(separation, "sweep",
                           "victim fidelity vs separation radius",
                           "separation sweep");
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--model", model_path, "model",
               "model JSON (default: calibrated device model)");
        p->add("--victim", victim, "victim", "victim benchmark name");
        p->add("--place", place, "place", "victim placement, e.g. 12,13,14");
        p->add("--radii", radii, "radii", "radii to bucket, e.g. 0,1,2,3");
        p->add("--workers", workers, "workers", "parallel workers (0 = auto)");
        p->add("--out", out_path, "out", "sweep CSV output")->required();
    }

    // rl
    CLI::App* rl = app.add_subcommand("rl", "policy-gradient qubit mapping");
    rl->require_subcommand(1);
    auto add_rl_common = [&](ParamSet* p) {
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--circuits", circuits, "circuits", "training circuit count");
        p->add("--lr", lr, "lr", "learning rate");
        p->add("--batch", batch, "batch", "circuits per episode");
        p->add("--hidden", hidden, "hidden", "hidden layer width");
        p->add("--actions", actions, "actions", "candidate placements K");
        p->add("--seed", seed, "seed", "master seed");
        p->add("--workers", workers, "workers", "parallel workers (0 = auto)");
    };
    {
        ParamSet* p = make(rl, "train", "train a mapping policy", "rl train");
        add_rl_common(p);
        p->add("--curve", curve_path, "curve", "training curve CSV output");
        p->add("--out", out_path, "out", "policy JSON output")->required();
    }
    {
        ParamSet* p = make(rl, "finetune", "fine-tune on 20% of the dataset",
                           "rl finetune");
        add_rl_common(p);
        p->add("--policy", policy_path, "policy", "input policy JSON")
            ->required();
        p->add("--model", model_path, "model",
               "model JSON (default: calibrated device model)");
        p->add("--out", out_path, "out", "policy JSON output")->required();
    }
    {
        ParamSet* p = make(rl, "map", "predict a placement for a circuit",
                           "rl map");
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--policy", policy_path, "policy", "policy JSON")->required();
        p->add("--circuit", circuit_path, "circuit", "circuit JSON")
            ->required();
        p->add("--out", out_path, "out", "placement JSON output");
    }

    // spectator
    CLI::App* spectator =
        app.add_subcommand("spectator", "spectator-qubit detection");
    spectator->require_subcommand(1);
    auto add_spectator_common = [&](ParamSet* p) {
        p->add("--device", device_path, "device", "device JSON file");
        p->add("--shots", shots, "shots", "shots per point");
        p->add("--seed", seed, "seed", "master seed");
        p->add("--flip", flip, "flip", "measurement flip probability");
        p->add("--duration", duration, "duration", "gate units per shot");
        p->add("--scale", scale, "scale", "attack coherent-term multiplier");
        p->add("--workers", workers, "workers", "parallel workers (0 = auto)");
    };
    {
        ParamSet* p = make(spectator, "sweep", "detection rate vs waiting time",
                           "spectator sweep");
        add_spectator_common(p);
        p->add("--tau", taus, "tau", "waiting times, e.g. 1..20 or 1,5,9");
        p->add("--out", out_path, "out", "eta CSV output")->required();
    }
    {
        ParamSet* p = make(spectator, "postselect",
                           "discard flagged shots from a Bell readout",
                           "spectator postselect");
        add_spectator_common(p);
        p->add("--tau-star", tau_star, "tau-star", "waiting time");
        p->add("--attack-frac", attack_frac, "attack-frac",
               "fraction of shots attacked");
        p->add("--out", out_path, "out", "histogram JSON output")->required();
    }

    // replay
    std::string manifest_path, replay_dir;
    std::optional<int> replay_workers;
    int replay_workers_value = 0;
    CLI::App* replay =
        app.add_subcommand("replay", "re-run an experiment from its manifest");
    replay->add_option("manifest", manifest_path, "manifest JSON file")
        ->required();
    replay->add_option("--out-dir", replay_dir,
                       "redirect outputs into this directory");
    CLI::Option* rw = replay->add_option("--workers", replay_workers_value,
                                         "override the worker count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (replay->parsed()) {
            if (rw->count() > 0) replay_workers = replay_workers_value;
            return run_replay(manifest_path, replay_dir, replay_workers);
        }
        for (const PendingRun& run : pending) {
            json config = run.params->resolve();
            int code = dispatch(run.command, config);
            if (code != 0) return code;
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

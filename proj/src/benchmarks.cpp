#include "qxs/benchmarks.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "qxs/device.hpp"
#include "qxs/simulate.hpp"

namespace qxs {

namespace {

constexpr double kPi = 3.14159265358979323846;

Gate tdg(int q) { return Gate::rz(q, -kPi / 4.0); }

/// Standard 6-CNOT Toffoli decomposition (controls a, b; target c).
void append_toffoli(Circuit& c, int a, int b, int t) {
    c.append(Gate::h(t));
    c.append(Gate::cnot(b, t));
    c.append(tdg(t));
    c.append(Gate::cnot(a, t));
    c.append(Gate::t(t));
    c.append(Gate::cnot(b, t));
    c.append(tdg(t));
    c.append(Gate::cnot(a, t));
    c.append(Gate::t(b));
    c.append(Gate::t(t));
    c.append(Gate::h(t));
    c.append(Gate::cnot(a, b));
    c.append(Gate::t(a));
    c.append(tdg(b));
    c.append(Gate::cnot(a, b));
}

/// CCZ on (a, b, t) via H-conjugated Toffoli.
void append_ccz(Circuit& c, int a, int b, int t) {
    c.append(Gate::h(t));
    append_toffoli(c, a, b, t);
    c.append(Gate::h(t));
}

void append_oracle(Circuit& c, const std::string& target) {
    // Phase oracle: X on zero bits, CCZ, X back.
    for (int q = 0; q < 3; ++q) {
        if (target[q] == '0') c.append(Gate::x(q));
    }
    append_ccz(c, 0, 1, 2);
    for (int q = 0; q < 3; ++q) {
        if (target[q] == '0') c.append(Gate::x(q));
    }
}

void append_diffusion(Circuit& c) {
    for (int q = 0; q < 3; ++q) c.append(Gate::h(q));
    for (int q = 0; q < 3; ++q) c.append(Gate::x(q));
    append_ccz(c, 0, 1, 2);
    for (int q = 0; q < 3; ++q) c.append(Gate::x(q));
    for (int q = 0; q < 3; ++q) c.append(Gate::h(q));
}

void check_target(const std::string& target) {
    if (target.size() != 3 ||
        target.find_first_not_of("01") != std::string::npos) {
        throw std::invalid_argument("target must be a 3-bit string");
    }
}

}  // namespace

Circuit build_syn(int n) {
    if (n < 1) throw std::invalid_argument("syn_n requires n >= 1");
    Circuit c(4, 2);
    c.append_layer({Gate::h(0), Gate::h(1)});
    for (int i = 0; i < n; ++i) c.append_layer(Gate::cnot(2, 3));
    c.append_layer({Gate::h(0), Gate::h(1)});
    c.append_layer({Gate::measure(0, 0), Gate::measure(1, 1)});
    return c;
}

Circuit build_toffoli(int n) {
    if (n < 1) throw std::invalid_argument("toffoli requires n >= 1");
    Circuit c(3, 3);
    c.append_layer({Gate::x(0), Gate::x(1)});
    c.append_layer({Gate::h(0), Gate::h(1), Gate::h(2)});
    for (int i = 0; i < n; ++i) append_toffoli(c, 0, 1, 2);
    c.append_layer({Gate::h(0), Gate::h(1), Gate::h(2)});
    c.append_layer(
        {Gate::measure(0, 0), Gate::measure(1, 1), Gate::measure(2, 2)});
    return c;
}

Circuit build_grover3(const std::string& target, bool with_measure) {
    check_target(target);
    Circuit c(3, with_measure ? 3 : 0);
    c.append_layer({Gate::h(0), Gate::h(1), Gate::h(2)});
    for (int iter = 0; iter < 2; ++iter) {
        append_oracle(c, target);
        append_diffusion(c);
    }
    if (with_measure) {
        c.append_layer(
            {Gate::measure(0, 0), Gate::measure(1, 1), Gate::measure(2, 2)});
    }
    return c;
}

Circuit schedule_with_attack(const Circuit& victim, int attack_control,
                             int attack_target) {
    int n = std::max({victim.qubits(), attack_control + 1, attack_target + 1});
    Circuit out(n, victim.cbits());
    for (const Layer& layer : victim.layers()) {
        Layer nl = layer;
        nl.push_back(Gate::cnot(attack_control, attack_target));
        out.append_layer(nl);
    }
    return out;
}

Circuit build_attack(const std::string& target) {
    check_target(target);
    Circuit grover = build_grover3(target, true);
    return schedule_with_attack(grover, 3, 4);
}

Circuit build_benchmark(const std::string& name) {
    if (name.rfind("syn_", 0) == 0) return build_syn(std::stoi(name.substr(4)));
    if (name.rfind("toffoli", 0) == 0) {
        int n = name.size() > 8 ? std::stoi(name.substr(8)) : 10;
        return build_toffoli(n);
    }
    if (name == "grover3") return build_grover3("110");
    if (name.rfind("grover3:", 0) == 0) return build_grover3(name.substr(8));
    if (name == "attack") return build_attack("110");
    if (name.rfind("attack:", 0) == 0) return build_attack(name.substr(7));
    throw std::invalid_argument("unknown benchmark: " + name);
}

CrosstalkModel attack_demo_model() {
    // Five-qubit line; the attack pair (3,4) sits beside the Grover qubits.
    // Strength pinned so the attacked histogram is near uniform while a
    // clean run stays above 0.9 success probability.
    DeviceTopology line = DeviceTopology::path(5);
    SynthOptions opts;
    opts.idle_rate = 3e-4;
    return synth_default_model(line, 0.08, 0.55, 3, opts);
}

Distribution normalize(const Counts& counts) {
    if (counts.empty()) throw std::invalid_argument("empty counts");
    double total = 0;
    for (const auto& [k, v] : counts) total += double(v);
    if (total <= 0) throw std::invalid_argument("empty counts");
    Distribution d;
    for (const auto& [k, v] : counts) d[k] = double(v) / total;
    return d;
}

Distribution uniform_distribution(int bits) {
    Distribution d;
    int total = 1 << bits;
    for (int i = 0; i < total; ++i) {
        std::string key(bits, '0');
        for (int b = 0; b < bits; ++b) {
            if ((i >> (bits - 1 - b)) & 1) key[b] = '1';
        }
        d[key] = 1.0 / total;
    }
    return d;
}

double tvd(const Distribution& p, const Distribution& q) {
    if (p.empty() || q.empty()) throw std::invalid_argument("empty input");
    std::set<std::string> support;
    for (const auto& [k, v] : p) support.insert(k);
    for (const auto& [k, v] : q) support.insert(k);
    double l1 = 0;
    for (const std::string& k : support) {
        auto ip = p.find(k);
        auto iq = q.find(k);
        l1 += std::abs((ip != p.end() ? ip->second : 0.0) -
                       (iq != q.end() ? iq->second : 0.0));
    }
    return l1 / 2.0;
}

double tvd(const Counts& p, const Counts& q) {
    return tvd(normalize(p), normalize(q));
}

double tvd(const Counts& p, const Distribution& q) {
    return tvd(normalize(p), q);
}

FvgResult fvg_check(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw std::invalid_argument("dimension mismatch");
    }
    Eigen::MatrixXcd diff = rho.data() - sigma.data();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff,
                                                       Eigen::EigenvaluesOnly);
    double d = es.eigenvalues().cwiseAbs().sum() / 2.0;

    // Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> er(rho.data());
    Eigen::VectorXd vals = er.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd sqrt_rho = er.eigenvectors() *
                                vals.cwiseSqrt().asDiagonal() *
                                er.eigenvectors().adjoint();
    Eigen::MatrixXcd inner = sqrt_rho * sigma.data() * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ei(inner);
    double tr = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    double f = tr * tr;

    FvgResult out;
    out.trace_distance = d;
    out.fidelity = f;
    double lower = 1.0 - std::sqrt(std::max(0.0, f));
    double upper = std::sqrt(std::max(0.0, 1.0 - f));
    out.bounds_hold = (d >= lower - 1e-9) && (d <= upper + 1e-9);
    return out;
}

ScenarioReport compare_scenarios(
    const Circuit& circuit, const Counts& reference,
    const std::vector<std::pair<std::string, NoiseSpec>>& specs,
    long long shots, std::uint64_t seed) {
    if (reference.empty()) throw std::invalid_argument("empty reference");
    std::size_t ref_len = reference.begin()->first.size();
    if (ref_len != static_cast<std::size_t>(circuit.cbits())) {
        throw std::invalid_argument("reference bitstring length mismatch");
    }
    Distribution ref = normalize(reference);
    ScenarioReport report;
    for (const auto& [label, spec] : specs) {
        Counts counts = simulate_counts(circuit, spec, shots, seed);
        report.scenarios.push_back({label, tvd(counts, ref), std::move(counts)});
    }
    return report;
}

std::string counts_to_json(const Counts& counts) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : counts) doc[k] = v;
    return doc.dump(2);
}

Counts counts_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Counts counts;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        long long v = it.value().get<long long>();
        if (v < 0) throw std::invalid_argument("negative count");
        counts[it.key()] = v;
    }
    return counts;
}

}  // namespace qxs

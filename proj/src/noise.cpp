#include "qxs/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qxs/device.hpp"

namespace qxs {

namespace {
constexpr double kPi = 3.14159265358979323846;

const Matrix2c& pauli(int axis) {
    static const Matrix2c x = gate_unitary_1q(GateKind::X);
    static const Matrix2c y = gate_unitary_1q(GateKind::Y);
    static const Matrix2c z = gate_unitary_1q(GateKind::Z);
    switch (axis) {
        case 0: return x;
        case 1: return y;
        default: return z;
    }
}
}  // namespace

bool HsaRates::is_zero() const {
    for (int i = 0; i < 3; ++i) {
        if (h[i] != 0 || s[i] != 0 || a[i] != 0) return false;
    }
    return true;
}

void HsaRates::validate() const {
    double ssum = 0;
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(h[i]) || !std::isfinite(s[i]) || !std::isfinite(a[i])) {
            throw std::invalid_argument("non-finite HSA rate");
        }
        if (s[i] < 0) throw std::invalid_argument("negative stochastic rate");
        if (std::abs(h[i]) > kPi) {
            throw std::invalid_argument("Hamiltonian rate exceeds pi per unit");
        }
        ssum += s[i];
    }
    if (ssum > 1.0) throw std::invalid_argument("stochastic rates sum above 1");
}

HsaRates& HsaRates::operator+=(const HsaRates& other) {
    for (int i = 0; i < 3; ++i) {
        h[i] += other.h[i];
        s[i] += other.s[i];
        a[i] += other.a[i];
    }
    return *this;
}

HsaRates HsaRates::scaled(double factor) const {
    HsaRates out;
    for (int i = 0; i < 3; ++i) {
        out.h[i] = h[i] * factor;
        out.s[i] = s[i] * factor;
        out.a[i] = a[i] * factor;
    }
    return out;
}

std::string gate_key(GateKind kind, int a, int b) {
    std::ostringstream os;
    os << gate_kind_name(kind) << ":" << a << "," << b;
    return os.str();
}

namespace {

struct ParsedKey {
    GateKind kind;
    int a, b;
};

ParsedKey parse_gate_key(const std::string& key) {
    auto colon = key.find(':');
    auto comma = key.find(',', colon);
    if (colon == std::string::npos || comma == std::string::npos) {
        throw std::invalid_argument("malformed gate key: " + key);
    }
    ParsedKey out;
    out.kind = gate_kind_from_name(key.substr(0, colon));
    out.a = std::stoi(key.substr(colon + 1, comma - colon - 1));
    out.b = std::stoi(key.substr(comma + 1));
    return out;
}

}  // namespace

void CrosstalkModel::validate(int qubit_count) const {
    for (const auto& [q, rates] : idle) {
        if (q < 0 || q >= qubit_count) {
            throw std::invalid_argument("idle entry references unknown qubit");
        }
        rates.validate();
    }
    for (const auto& [key, victims] : gates) {
        ParsedKey pk = parse_gate_key(key);
        if (pk.a < 0 || pk.a >= qubit_count || pk.b < 0 || pk.b >= qubit_count) {
            throw std::invalid_argument("gate entry references unknown qubit");
        }
        for (const auto& [v, rates] : victims) {
            if (v < 0 || v >= qubit_count) {
                throw std::invalid_argument("victim references unknown qubit");
            }
            if (v == pk.a || v == pk.b) {
                throw std::invalid_argument("victim overlaps gate operands");
            }
            rates.validate();
        }
    }
}

bool CrosstalkModel::all_zero() const {
    for (const auto& [q, r] : idle) {
        if (!r.is_zero()) return false;
    }
    for (const auto& [k, victims] : gates) {
        for (const auto& [v, r] : victims) {
            if (!r.is_zero()) return false;
        }
    }
    return true;
}

namespace {

nlohmann::ordered_json rates_to_json(const HsaRates& r) {
    return {{"h", r.h}, {"s", r.s}, {"a", r.a}};
}

HsaRates rates_from_json(const nlohmann::json& j) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "h" && it.key() != "s" && it.key() != "a") {
            throw std::invalid_argument("unknown field in rates: " + it.key());
        }
    }
    HsaRates r;
    r.h = j.at("h").get<std::array<double, 3>>();
    r.s = j.at("s").get<std::array<double, 3>>();
    r.a = j.at("a").get<std::array<double, 3>>();
    return r;
}

}  // namespace

std::string CrosstalkModel::to_json() const {
    nlohmann::ordered_json doc;
    doc["idle"] = nlohmann::ordered_json::object();
    for (const auto& [q, r] : idle) {
        doc["idle"][std::to_string(q)] = rates_to_json(r);
    }
    doc["gates"] = nlohmann::ordered_json::object();
    for (const auto& [key, victims] : gates) {
        nlohmann::ordered_json jv = nlohmann::ordered_json::object();
        for (const auto& [v, r] : victims) {
            jv[std::to_string(v)] = rates_to_json(r);
        }
        doc["gates"][key] = jv;
    }
    return doc.dump(2);
}

CrosstalkModel CrosstalkModel::from_json(const std::string& text,
                                         int qubit_count) {
    nlohmann::json doc = nlohmann::json::parse(text);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() != "idle" && it.key() != "gates") {
            throw std::invalid_argument("unknown field in model: " + it.key());
        }
    }
    CrosstalkModel m;
    if (doc.contains("idle")) {
        for (auto it = doc["idle"].begin(); it != doc["idle"].end(); ++it) {
            m.idle[std::stoi(it.key())] = rates_from_json(it.value());
        }
    }
    if (doc.contains("gates")) {
        for (auto it = doc["gates"].begin(); it != doc["gates"].end(); ++it) {
            std::map<int, HsaRates> victims;
            for (auto vit = it.value().begin(); vit != it.value().end(); ++vit) {
                victims[std::stoi(vit.key())] = rates_from_json(vit.value());
            }
            m.gates[it.key()] = std::move(victims);
        }
    }
    m.validate(qubit_count);
    return m;
}

CrosstalkModel CrosstalkModel::restricted(
    const std::vector<int>& physical) const {
    std::map<int, int> local;
    for (std::size_t i = 0; i < physical.size(); ++i) {
        local[physical[i]] = static_cast<int>(i);
    }
    CrosstalkModel out;
    out.strict = false;  // restriction intentionally drops entries
    for (const auto& [q, r] : idle) {
        auto it = local.find(q);
        if (it != local.end()) out.idle[it->second] = r;
    }
    for (const auto& [key, victims] : gates) {
        ParsedKey pk = parse_gate_key(key);
        auto ia = local.find(pk.a);
        auto ib = local.find(pk.b);
        if (ia == local.end() || ib == local.end()) continue;
        std::map<int, HsaRates> lv;
        for (const auto& [v, r] : victims) {
            auto iv = local.find(v);
            if (iv != local.end()) lv[iv->second] = r;
        }
        if (!lv.empty()) {
            out.gates[gate_key(pk.kind, ia->second, ib->second)] = std::move(lv);
        }
    }
    return out;
}

void BaselineNoise::validate() const {
    for (std::size_t q = 0; q < t1.size(); ++q) {
        if (t1[q] <= 0 || t2[q] <= 0) {
            throw std::invalid_argument("non-positive T1/T2");
        }
        if (t2[q] > 2.0 * t1[q] + 1e-9) {
            throw std::invalid_argument("T2 exceeds 2*T1");
        }
    }
    for (const auto& [e, p] : cx_depol) {
        if (p < 0 || p > 1) throw std::invalid_argument("depolarizing prob");
    }
    for (double p : readout_flip) {
        if (p < 0 || p > 1) throw std::invalid_argument("readout prob");
    }
}

double NoiseSpec::readout_flip(int q) const {
    if (!baseline || q >= static_cast<int>(baseline->readout_flip.size())) {
        return 0.0;
    }
    return baseline->readout_flip[q];
}

void apply_hsa(DensityMatrix& rho, int q, const HsaRates& rates, double dt) {
    if (rates.is_zero() || dt == 0.0) return;
    double p_total = dt * (rates.s[0] + rates.s[1] + rates.s[2]);
    if (p_total > 1.0) {
        throw std::invalid_argument("scaled stochastic probabilities exceed 1");
    }
    // Hamiltonian: rotation about the h axis by |h| dt.
    double hx = rates.h[0] * dt, hy = rates.h[1] * dt, hz = rates.h[2] * dt;
    double angle = std::sqrt(hx * hx + hy * hy + hz * hz);
    if (angle > 0) {
        Complex i(0, 1);
        Matrix2c gen = (hx * pauli(0) + hy * pauli(1) + hz * pauli(2)) / angle;
        Matrix2c u = std::cos(angle / 2) * Matrix2c::Identity() -
                     i * std::sin(angle / 2) * gen;
        apply_unitary(rho, u, {q});
    }
    // Stochastic Pauli mixture, applied in place. Conjugating by X or Y
    // swaps the qubit's bit on both indices; Y and Z add a sign when the
    // row/column bits differ. Writing the mixed 2x2 blocks directly avoids
    // three full-matrix copies per application.
    if (p_total > 0) {
        double px = dt * rates.s[0], py = dt * rates.s[1],
               pz = dt * rates.s[2];
        Eigen::MatrixXcd& m = rho.data();
        Eigen::Index dim = m.rows();
        Eigen::Index bit = Eigen::Index(1) << (rho.qubits() - 1 - q);
        double keep_diag = 1.0 - px - py;
        double swap_diag = px + py;
        double keep_off = 1.0 - px - py - 2.0 * pz;
        double swap_off = px - py;
        for (Eigen::Index r = 0; r < dim; ++r) {
            if (r & bit) continue;
            for (Eigen::Index c = 0; c < dim; ++c) {
                if (c & bit) continue;
                Complex a = m(r, c), b = m(r, c | bit);
                Complex cc = m(r | bit, c), d = m(r | bit, c | bit);
                m(r, c) = keep_diag * a + swap_diag * d;
                m(r | bit, c | bit) = keep_diag * d + swap_diag * a;
                m(r, c | bit) = keep_off * b + swap_off * cc;
                m(r | bit, c) = keep_off * cc + swap_off * b;
            }
        }
    }
    // Affine displacement of the Bloch vector, then clip back to PSD.
    if (rates.a[0] != 0 || rates.a[1] != 0 || rates.a[2] != 0) {
        std::vector<int> others;
        for (int j = 0; j < rho.qubits(); ++j) {
            if (j != q) others.push_back(j);
        }
        Eigen::MatrixXcd rest =
            others.empty()
                ? Eigen::MatrixXcd::Ones(1, 1)
                : partial_trace(rho, others).data();
        // Embed (a . sigma)/2 (x) rest at position q. Build by iterating
        // full indices; rest has qubit order = others.
        int n = rho.qubits();
        Eigen::Index dim = rho.dim();
        auto rest_index = [&](Eigen::Index idx) {
            Eigen::Index out = 0;
            for (int j : others) out = (out << 1) | ((idx >> (n - 1 - j)) & 1);
            return out;
        };
        int shift = n - 1 - q;
        for (int axis = 0; axis < 3; ++axis) {
            double d = rates.a[axis] * dt;
            if (d == 0) continue;
            const Matrix2c& p = pauli(axis);
            for (Eigen::Index r = 0; r < dim; ++r) {
                for (Eigen::Index c = 0; c < dim; ++c) {
                    Eigen::Index rr = rest_index(r), rc = rest_index(c);
                    if (rr != rc) continue;
                    Complex pv = p((r >> shift) & 1, (c >> shift) & 1);
                    if (pv == Complex(0, 0)) continue;
                    // Only diagonal rest entries survive the trace pairing.
                    rho.data()(r, c) += (d / 2.0) * pv * rest(rr, rr);
                }
            }
        }
        rho.clip_to_physical();
    }
}

namespace {

void apply_baseline_qubit(DensityMatrix& rho, int q, const BaselineNoise& b,
                          double dt) {
    double t1 = b.t1.at(q), t2 = b.t2.at(q);
    double p_damp = 1.0 - std::exp(-dt / t1);
    std::vector<Matrix2c> kraus(2);
    kraus[0] << 1, 0, 0, std::sqrt(1.0 - p_damp);
    kraus[1] << 0, std::sqrt(p_damp), 0, 0;
    apply_kraus_1q(rho, kraus, q);
    double gamma_phi = 1.0 / t2 - 1.0 / (2.0 * t1);
    if (gamma_phi > 0) {
        double p_z = (1.0 - std::exp(-dt * gamma_phi)) / 2.0;
        HsaRates r;
        r.s[2] = p_z / dt;
        apply_hsa(rho, q, r, dt);
    }
}

void apply_depolarizing_2q(DensityMatrix& rho, int a, int b, double p) {
    if (p <= 0) return;
    std::vector<int> others;
    for (int j = 0; j < rho.qubits(); ++j) {
        if (j != a && j != b) others.push_back(j);
    }
    // (1-p) rho + p (I/4 (x) tr_ab rho)
    Eigen::MatrixXcd mixed;
    if (others.empty()) {
        mixed = Eigen::MatrixXcd::Identity(rho.dim(), rho.dim()) /
                double(rho.dim());
    } else {
        DensityMatrix rest = partial_trace(rho, others);
        int n = rho.qubits();
        Eigen::Index dim = rho.dim();
        mixed = Eigen::MatrixXcd::Zero(dim, dim);
        auto rest_index = [&](Eigen::Index idx) {
            Eigen::Index out = 0;
            for (int j : others) out = (out << 1) | ((idx >> (n - 1 - j)) & 1);
            return out;
        };
        auto ab_bits = [&](Eigen::Index idx) {
            return (((idx >> (n - 1 - a)) & 1) << 1) | ((idx >> (n - 1 - b)) & 1);
        };
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                if (ab_bits(r) != ab_bits(c)) continue;
                mixed(r, c) = rest.data()(rest_index(r), rest_index(c)) / 4.0;
            }
        }
    }
    rho.data() = (1.0 - p) * rho.data() + p * mixed;
}

}  // namespace

void apply_layer_noise(DensityMatrix& rho, const Layer& layer,
                       const NoiseSpec& spec) {
    apply_layer_noise(rho, layer, spec, layer_duration(layer));
}

void apply_layer_noise(DensityMatrix& rho, const Layer& layer,
                       const NoiseSpec& spec, double dt) {
    if (!spec.enabled()) return;
    std::vector<int> idle = idle_qubits(layer, rho.qubits());

    if (spec.kind == NoiseKind::Crosstalk || spec.kind == NoiseKind::Combined) {
        const CrosstalkModel& m = *spec.crosstalk;
        for (int q : idle) {
            auto it = m.idle.find(q);
            if (it != m.idle.end()) apply_hsa(rho, q, it->second, dt);
        }
        for (const Gate& g : layer) {
            if (g.operands.size() != 2) continue;
            auto it = m.gates.find(gate_key(g.kind, g.operands[0], g.operands[1]));
            if (it == m.gates.end()) {
                if (m.strict) {
                    throw std::runtime_error("no crosstalk entry for fired gate " +
                                             gate_key(g.kind, g.operands[0],
                                                      g.operands[1]));
                }
                continue;
            }
            double gd = gate_duration(g.kind);
            for (const auto& [victim, rates] : it->second) {
                apply_hsa(rho, victim, rates, gd);
            }
        }
    }

    if (spec.kind == NoiseKind::Baseline || spec.kind == NoiseKind::Combined) {
        const BaselineNoise& b = *spec.baseline;
        if (static_cast<int>(b.t1.size()) < rho.qubits()) {
            throw std::runtime_error("baseline noise missing qubit entries");
        }
        for (int q = 0; q < rho.qubits(); ++q) {
            apply_baseline_qubit(rho, q, b, dt);
        }
        for (const Gate& g : layer) {
            if (g.operands.size() != 2) continue;
            int a = std::min(g.operands[0], g.operands[1]);
            int bq = std::max(g.operands[0], g.operands[1]);
            auto it = b.cx_depol.find({a, bq});
            if (it != b.cx_depol.end()) {
                apply_depolarizing_2q(rho, g.operands[0], g.operands[1],
                                      it->second);
            }
        }
    }
}

CrosstalkModel synth_default_model(const DeviceTopology& topo, double alpha,
                                   double beta, int cutoff,
                                   const SynthOptions& opts) {
    if (alpha < 0) throw std::invalid_argument("alpha must be non-negative");
    if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
    CrosstalkModel m;
    for (int q = 0; q < topo.qubit_count; ++q) {
        HsaRates r;
        for (int i = 0; i < 3; ++i) r.s[i] = opts.idle_rate / 3.0;
        auto it = opts.idle_sz.find(q);
        if (it != opts.idle_sz.end()) r.s[2] += it->second;
        m.idle[q] = r;
    }
    for (const auto& [a, b] : topo.edges) {
        double w = 1.0;
        auto wit = opts.edge_weights.find({a, b});
        if (wit != opts.edge_weights.end()) w = wit->second;
        std::map<int, HsaRates> victims;
        for (int v = 0; v < topo.qubit_count; ++v) {
            if (v == a || v == b) continue;
            int d = topo.distance_to_edge(v, a, b);
            if (d < 1 || d > cutoff) continue;
            double mag = alpha * w * std::pow(beta, d - 1);
            HsaRates r;
            r.h[0] = opts.hx_share * mag;
            r.h[2] = opts.hz_share * mag;
            r.s[0] = opts.sx_share * mag;
            victims[v] = r;
        }
        if (!victims.empty()) {
            m.gates[gate_key(GateKind::CNOT, a, b)] = victims;
            m.gates[gate_key(GateKind::CNOT, b, a)] = victims;
        }
    }
    return m;
}

DefaultModelParams default_model_params() {
    // alpha picked so a Grover victim directly beside the repeated-CNOT
    // attack lands near fidelity 0.5 (see the placement-table tests).
    return {0.02, 0.4, 3, 0.8};
}

CrosstalkModel default_device_model(const DeviceTopology& topo,
                                    const Calibration& cal) {
    return device_model_with_params(topo, cal, default_model_params());
}

CrosstalkModel device_model_with_params(const DeviceTopology& topo,
                                        const Calibration& cal,
                                        const DefaultModelParams& p) {
    SynthOptions opts;
    double median_err = 0.008;
    for (const auto& [edge, err] : cal.cx_error) {
        // Linear in the relative CX error, clamped so outliers do not
        // dominate; a dead edge contributes at the nominal weight.
        double w = cal.edge_is_dead(edge.first, edge.second)
                       ? 1.0
                       : std::clamp(err / median_err, 0.2, 4.0);
        opts.edge_weights[edge] = w;
    }
    for (int q = 0; q < topo.qubit_count; ++q) {
        // Excess dephasing beyond a 100 us reference T2, expressed per time
        // unit; quiet qubits contribute nothing beyond the uniform floor.
        double gamma_us =
            std::max(0.0, 1.0 / cal.t2_us.at(q) - 1.0 / 100.0);
        opts.idle_sz[q] = p.idle_kappa * gamma_us * kTimeUnitUs;
    }
    return synth_default_model(topo, p.alpha, p.beta, p.cutoff, opts);
}

BaselineNoise baseline_from_calibration(const Calibration& cal) {
    BaselineNoise b;
    for (std::size_t q = 0; q < cal.t1_us.size(); ++q) {
        b.t1.push_back(cal.t1_us[q] / kTimeUnitUs);
        b.t2.push_back(std::min(cal.t2_us[q], 2.0 * cal.t1_us[q]) / kTimeUnitUs);
        b.readout_flip.push_back(q < cal.readout_flip.size()
                                     ? cal.readout_flip[q]
                                     : 0.0);
    }
    for (const auto& [edge, err] : cal.cx_error) {
        if (err < 1.0) b.cx_depol[edge] = err;
    }
    b.validate();
    return b;
}

CrosstalkModel load_model(const std::string& path, int qubit_count) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return CrosstalkModel::from_json(ss.str(), qubit_count);
}

void save_model(const CrosstalkModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model.to_json() << "\n";
}

}  // namespace qxs

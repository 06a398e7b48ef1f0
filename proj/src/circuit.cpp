#include "qxs/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace qxs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* gate_kind_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::Y: return "y";
        case GateKind::Z: return "z";
        case GateKind::S: return "s";
        case GateKind::T: return "t";
        case GateKind::RX: return "rx";
        case GateKind::RY: return "ry";
        case GateKind::RZ: return "rz";
        case GateKind::CNOT: return "cnot";
        case GateKind::MEASURE: return "measure";
        case GateKind::RESET: return "reset";
        case GateKind::IDLE: return "idle";
    }
    return "?";
}

GateKind gate_kind_from_name(const std::string& name) {
    static const std::vector<GateKind> all = {
        GateKind::H,  GateKind::X,  GateKind::Y,    GateKind::Z,
        GateKind::S,  GateKind::T,  GateKind::RX,   GateKind::RY,
        GateKind::RZ, GateKind::CNOT, GateKind::MEASURE, GateKind::RESET,
        GateKind::IDLE};
    for (GateKind k : all) {
        if (name == gate_kind_name(k)) return k;
    }
    throw std::invalid_argument("unknown gate kind: " + name);
}

bool is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

bool is_unitary_kind(GateKind kind) {
    return kind != GateKind::MEASURE && kind != GateKind::RESET &&
           kind != GateKind::IDLE;
}

int gate_arity(GateKind kind) { return kind == GateKind::CNOT ? 2 : 1; }

double gate_duration(GateKind kind) {
    switch (kind) {
        case GateKind::CNOT: return 1.0;
        case GateKind::MEASURE: return 2.0;
        case GateKind::RESET: return 1.0;
        default: return 0.5;
    }
}

Matrix2c gate_unitary_1q(GateKind kind, std::optional<double> angle) {
    const Complex i(0.0, 1.0);
    Matrix2c u;
    switch (kind) {
        case GateKind::H:
            u << 1, 1, 1, -1;
            return u / std::sqrt(2.0);
        case GateKind::X:
            u << 0, 1, 1, 0;
            return u;
        case GateKind::Y:
            u << 0, -i, i, 0;
            return u;
        case GateKind::Z:
            u << 1, 0, 0, -1;
            return u;
        case GateKind::S:
            u << 1, 0, 0, i;
            return u;
        case GateKind::T:
            u << 1, 0, 0, std::exp(i * (kPi / 4.0));
            return u;
        case GateKind::RX: {
            double a = angle.value() / 2.0;
            u << std::cos(a), -i * std::sin(a), -i * std::sin(a), std::cos(a);
            return u;
        }
        case GateKind::RY: {
            double a = angle.value() / 2.0;
            u << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
            return u;
        }
        case GateKind::RZ: {
            double a = angle.value() / 2.0;
            u << std::exp(-i * a), 0, 0, std::exp(i * a);
            return u;
        }
        default:
            throw std::invalid_argument("not a 1-qubit unitary kind");
    }
}

void Circuit::check_gate(const Gate& g) const {
    if (static_cast<int>(g.operands.size()) != gate_arity(g.kind)) {
        throw std::invalid_argument("gate has wrong operand count");
    }
    std::set<int> seen;
    for (int q : g.operands) {
        if (q < 0 || q >= qubits_) {
            throw std::invalid_argument("operand out of range");
        }
        if (!seen.insert(q).second) {
            throw std::invalid_argument("repeated operand");
        }
    }
    if (is_rotation(g.kind) != g.angle.has_value()) {
        throw std::invalid_argument(g.angle ? "angle on non-rotation gate"
                                            : "missing angle on rotation gate");
    }
    if (g.kind == GateKind::MEASURE) {
        if (!g.cbit || *g.cbit < 0 || *g.cbit >= cbits_) {
            throw std::invalid_argument("measure needs classical bit in range");
        }
    } else if (g.cbit) {
        throw std::invalid_argument("classical bit on non-measure gate");
    }
}

void Circuit::append(const Gate& g) {
    check_gate(g);
    if (!layers_.empty()) {
        std::set<int> busy;
        for (const Gate& other : layers_.back()) {
            busy.insert(other.operands.begin(), other.operands.end());
        }
        bool free = std::none_of(g.operands.begin(), g.operands.end(),
                                 [&](int q) { return busy.count(q) > 0; });
        if (free) {
            layers_.back().push_back(g);
            return;
        }
    }
    layers_.push_back({g});
}

void Circuit::append_layer(const Gate& g) {
    check_gate(g);
    layers_.push_back({g});
}

void Circuit::append_layer(const Layer& layer) {
    layers_.emplace_back();
    std::set<int> busy;
    for (const Gate& g : layer) {
        check_gate(g);
        for (int q : g.operands) {
            if (!busy.insert(q).second) {
                throw std::invalid_argument("qubit appears twice in layer");
            }
        }
        layers_.back().push_back(g);
    }
}

std::size_t Circuit::gate_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.size();
    return n;
}

bool Circuit::has_measurement() const {
    for (const Layer& l : layers_) {
        for (const Gate& g : l) {
            if (g.kind == GateKind::MEASURE) return true;
        }
    }
    return false;
}

bool Circuit::has_mid_circuit_measurement() const {
    // Track, per qubit, whether it has been measured; any later gate on a
    // measured qubit (or any RESET) forces trajectory simulation.
    std::vector<bool> measured(qubits_, false);
    for (const Layer& l : layers_) {
        for (const Gate& g : l) {
            if (g.kind == GateKind::RESET) return true;
            for (int q : g.operands) {
                if (measured[q]) return true;
            }
            if (g.kind == GateKind::MEASURE) measured[g.operands[0]] = true;
        }
    }
    return false;
}

void Circuit::validate() const {
    if (qubits_ <= 0) throw std::invalid_argument("circuit has no qubits");
    for (const Layer& l : layers_) {
        std::set<int> busy;
        for (const Gate& g : l) {
            check_gate(g);
            for (int q : g.operands) {
                if (!busy.insert(q).second) {
                    throw std::invalid_argument("qubit appears twice in layer");
                }
            }
        }
    }
}

std::string Circuit::to_json() const {
    nlohmann::ordered_json doc;
    doc["qubits"] = qubits_;
    doc["cbits"] = cbits_;
    doc["layers"] = nlohmann::json::array();
    for (const Layer& l : layers_) {
        nlohmann::ordered_json jl = nlohmann::json::array();
        for (const Gate& g : l) {
            nlohmann::ordered_json jg;
            jg["kind"] = gate_kind_name(g.kind);
            jg["operands"] = g.operands;
            if (g.angle) jg["angle"] = *g.angle;
            if (g.cbit) jg["cbit"] = *g.cbit;
            jl.push_back(jg);
        }
        doc["layers"].push_back(jl);
    }
    return doc.dump();
}

Circuit Circuit::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Circuit c(doc.at("qubits").get<int>(), doc.value("cbits", 0));
    for (const auto& jl : doc.at("layers")) {
        Layer layer;
        for (const auto& jg : jl) {
            Gate g;
            g.kind = gate_kind_from_name(jg.at("kind").get<std::string>());
            g.operands = jg.at("operands").get<std::vector<int>>();
            if (jg.contains("angle")) g.angle = jg.at("angle").get<double>();
            if (jg.contains("cbit")) g.cbit = jg.at("cbit").get<int>();
            layer.push_back(g);
        }
        c.append_layer(layer);
    }
    c.validate();
    return c;
}

Circuit Circuit::remapped(const std::vector<int>& map, int new_qubits) const {
    if (static_cast<int>(map.size()) != qubits_) {
        throw std::invalid_argument("remap size mismatch");
    }
    Circuit out(new_qubits, cbits_);
    for (const Layer& l : layers_) {
        Layer nl;
        for (Gate g : l) {
            for (int& q : g.operands) q = map.at(q);
            nl.push_back(g);
        }
        out.append_layer(nl);
    }
    return out;
}

double layer_duration(const Layer& layer) {
    double d = 0.5;
    for (const Gate& g : layer) d = std::max(d, gate_duration(g.kind));
    return d;
}

std::vector<int> idle_qubits(const Layer& layer, int qubits) {
    std::vector<bool> busy(qubits, false);
    for (const Gate& g : layer) {
        // An explicit IDLE occupies a layer slot but the qubit still idles.
        if (g.kind == GateKind::IDLE) continue;
        for (int q : g.operands) busy[q] = true;
    }
    std::vector<int> idle;
    for (int q = 0; q < qubits; ++q) {
        if (!busy[q]) idle.push_back(q);
    }
    return idle;
}

}  // namespace qxs

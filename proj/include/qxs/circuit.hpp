#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qxs {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

enum class GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    RX,
    RY,
    RZ,
    CNOT,
    MEASURE,
    RESET,
    IDLE,
};

const char* gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(const std::string& name);

bool is_rotation(GateKind kind);
bool is_unitary_kind(GateKind kind);
int gate_arity(GateKind kind);

/// Gate durations in abstract time units. The CNOT sets the unit; single
/// qubit gates take half a unit and measurement takes two.
double gate_duration(GateKind kind);

struct Gate {
    GateKind kind = GateKind::IDLE;
    std::vector<int> operands;
    std::optional<double> angle;  // rotation kinds only
    std::optional<int> cbit;      // MEASURE only

    static Gate h(int q) { return {GateKind::H, {q}, {}, {}}; }
    static Gate x(int q) { return {GateKind::X, {q}, {}, {}}; }
    static Gate y(int q) { return {GateKind::Y, {q}, {}, {}}; }
    static Gate z(int q) { return {GateKind::Z, {q}, {}, {}}; }
    static Gate s(int q) { return {GateKind::S, {q}, {}, {}}; }
    static Gate t(int q) { return {GateKind::T, {q}, {}, {}}; }
    static Gate rx(int q, double a) { return {GateKind::RX, {q}, a, {}}; }
    static Gate ry(int q, double a) { return {GateKind::RY, {q}, a, {}}; }
    static Gate rz(int q, double a) { return {GateKind::RZ, {q}, a, {}}; }
    static Gate cnot(int c, int t) { return {GateKind::CNOT, {c, t}, {}, {}}; }
    static Gate measure(int q, int c) { return {GateKind::MEASURE, {q}, {}, c}; }
    static Gate reset(int q) { return {GateKind::RESET, {q}, {}, {}}; }
    static Gate idle(int q) { return {GateKind::IDLE, {q}, {}, {}}; }
};

/// 2x2 unitary for a single-qubit gate kind.
Matrix2c gate_unitary_1q(GateKind kind, std::optional<double> angle = {});

using Layer = std::vector<Gate>;

/// A circuit is an ordered list of layers; within a layer all gates act on
/// pairwise-disjoint qubits. Layer structure fixes the time base used by
/// the noise channels.
class Circuit {
  public:
    Circuit() = default;
    Circuit(int qubits, int cbits = 0) : qubits_(qubits), cbits_(cbits) {}

    int qubits() const { return qubits_; }
    int cbits() const { return cbits_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    /// Appends a gate, packing it into the last layer when the operands are
    /// free there, otherwise opening a new layer.
    void append(const Gate& g);
    /// Appends a gate into a fresh layer.
    void append_layer(const Gate& g);
    void append_layer(const Layer& layer);

    std::size_t depth() const { return layers_.size(); }
    std::size_t gate_count() const;

    bool has_measurement() const;
    /// True if a MEASURE is followed by later activity on its qubit, or a
    /// RESET appears anywhere. Such circuits need per-shot trajectories.
    bool has_mid_circuit_measurement() const;

    /// Throws std::invalid_argument on any invariant violation.
    void validate() const;

    std::string to_json() const;
    static Circuit from_json(const std::string& text);

    /// Circuit with the given qubit permutation applied: logical qubit i acts
    /// on new index map[i]. `new_qubits` >= max(map)+1.
    Circuit remapped(const std::vector<int>& map, int new_qubits) const;

  private:
    void check_gate(const Gate& g) const;

    int qubits_ = 0;
    int cbits_ = 0;
    std::vector<Layer> layers_;
};

/// Duration of a layer: max gate duration within it (0.5 for an all-idle or
/// empty layer).
double layer_duration(const Layer& layer);

/// Qubits not touched by any gate in the layer.
std::vector<int> idle_qubits(const Layer& layer, int qubits);

}  // namespace qxs

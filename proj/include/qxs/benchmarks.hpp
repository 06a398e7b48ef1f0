#pragma once

#include <map>
#include <string>
#include <vector>

#include "qxs/circuit.hpp"
#include "qxs/density_matrix.hpp"
#include "qxs/noise.hpp"

namespace qxs {

/// Synthetic repeated-CNOT circuit: two qubits H-prepared and idling beside
/// n CNOT repetitions, then H and measurement of the idle pair.
Circuit build_syn(int n);

/// n decomposed Toffolis between X,X preparation and H conjugation.
Circuit build_toffoli(int n);

/// 3-qubit Grover with two iterations for the given 3-bit target,
/// Toffoli/CCZ decomposed to CNOT plus single-qubit gates.
Circuit build_grover3(const std::string& target, bool with_measure = true);

/// Grover victim on qubits 0-2 with a repeated-CNOT attack on qubits 3,4;
/// one attack CNOT accompanies every victim layer. Only the Grover qubits
/// are measured.
Circuit build_attack(const std::string& target);

Circuit build_benchmark(const std::string& name);

/// Appends one CNOT on `attack` into every layer of `victim` (and keeps
/// firing through trailing layers of whichever side is longer).
Circuit schedule_with_attack(const Circuit& victim, int attack_control,
                             int attack_target);

/// Shipped model for the standalone 5-qubit attack demonstration,
/// calibrated so the attacked Grover histogram is close to uniform.
CrosstalkModel attack_demo_model();

// --- distribution metrics ---

using Distribution = std::map<std::string, double>;

Distribution normalize(const Counts& counts);
Distribution uniform_distribution(int bits);

/// Total variational distance, computed as half the L1 distance over the
/// union support.
double tvd(const Distribution& p, const Distribution& q);
double tvd(const Counts& p, const Counts& q);
double tvd(const Counts& p, const Distribution& q);

struct FvgResult {
    double trace_distance;
    double fidelity;  // Uhlmann
    bool bounds_hold;
};

/// Trace distance, Uhlmann fidelity and whether
/// 1 - sqrt(F) <= D <= sqrt(1 - F) holds within 1e-9.
FvgResult fvg_check(const DensityMatrix& rho, const DensityMatrix& sigma);

struct ScenarioReport {
    struct Entry {
        std::string label;
        double tvd_to_reference;
        Counts counts;
    };
    std::vector<Entry> scenarios;
};

ScenarioReport compare_scenarios(
    const Circuit& circuit, const Counts& reference,
    const std::vector<std::pair<std::string, NoiseSpec>>& specs,
    long long shots, std::uint64_t seed);

std::string counts_to_json(const Counts& counts);
Counts counts_from_json(const std::string& text);

}  // namespace qxs

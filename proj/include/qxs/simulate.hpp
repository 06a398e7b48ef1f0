#pragma once

#include <optional>
#include <variant>

#include "qxs/circuit.hpp"
#include "qxs/density_matrix.hpp"
#include "qxs/noise.hpp"

namespace qxs {

/// Exact channel evolution; the circuit must not contain MEASURE or RESET.
DensityMatrix simulate_state(const Circuit& circuit, const NoiseSpec& noise,
                             bool debug_checks = false);

/// Exact evolution of the unitary part, ignoring a trailing measurement
/// layer. Requires no mid-circuit measurement.
DensityMatrix simulate_premeasure_state(const Circuit& circuit,
                                        const NoiseSpec& noise);

/// Sampled counts. Circuits with only terminal measurements evolve exactly
/// once and sample the outcome distribution; circuits with mid-circuit
/// measurement or reset run one trajectory per shot. Deterministic in
/// (circuit, noise, shots, seed).
Counts simulate_counts(const Circuit& circuit, const NoiseSpec& noise,
                       long long shots, std::uint64_t seed);

/// Statevector evolution for unitary-only circuits; the independent oracle
/// used by the density-matrix tests and the fidelity references.
Eigen::VectorXcd statevector(const Circuit& circuit);

struct SimResult {
    std::optional<DensityMatrix> state;
    std::optional<Counts> counts;
};

/// Dispatches on circuit content: measurement-free circuits return the exact
/// final state, measured circuits return Counts.
SimResult simulate(const Circuit& circuit, const NoiseSpec& noise,
                   long long shots, std::uint64_t seed);

}  // namespace qxs

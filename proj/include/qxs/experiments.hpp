#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qxs/benchmarks.hpp"
#include "qxs/device.hpp"
#include "qxs/noise.hpp"

namespace qxs {

/// Fidelity of the placed victim against its noise-free final state, with an
/// optional repeated-CNOT attack pair scheduled into every victim layer. The
/// simulated register is the victim/attack subset only; the model's channels
/// are strictly local, so qubits outside the subset cannot change the victim
/// marginal.
double placed_fidelity(const Circuit& victim, const Placement& victim_place,
                       std::optional<std::pair<int, int>> attack,
                       const CrosstalkModel& model,
                       const DeviceTopology& topo);

/// Success probability of the placed victim for a target bitstring, same
/// setup as placed_fidelity.
double placed_success(const Circuit& victim, const Placement& victim_place,
                      std::optional<std::pair<int, int>> attack,
                      const CrosstalkModel& model, const DeviceTopology& topo,
                      const std::string& target);

struct SummaryStats {
    double mean = 0, min = 0, max = 0, q1 = 0, median = 0, q3 = 0;
};
SummaryStats summarize(std::vector<double> values);

struct SweepResult {
    struct Bucket {
        int radius = 0;
        // Attack placement paired with the resulting victim fidelity,
        // sorted by placement.
        std::vector<std::pair<Placement, double>> entries;
        SummaryStats stats;
    };
    std::vector<Bucket> buckets;
};

/// For each radius r, evaluates every attack placement whose separation
/// radius from the victim equals exactly r. Empty buckets are recorded as
/// such. Deterministic and independent of worker count.
SweepResult run_separation_sweep(const Circuit& victim,
                                 const Placement& victim_place,
                                 const std::vector<int>& radii,
                                 const CrosstalkModel& model,
                                 const DeviceTopology& topo,
                                 const Calibration* cal = nullptr,
                                 int workers = 0);

struct PlacementComparison {
    struct Row {
        Placement placement;
        int radius = 0;
        double fidelity = 0;
        double success = 0;
    };
    std::vector<Row> rows;
    std::size_t best = 0;  // index of the max-fidelity row
};

/// Victim fidelity per candidate placement against a fixed attack pair.
PlacementComparison run_placement_table(
    const Circuit& victim, const std::vector<Placement>& candidates,
    std::pair<int, int> attack, const CrosstalkModel& model,
    const DeviceTopology& topo, const std::string& success_target = "",
    int workers = 0);

struct AttackDemoResult {
    Counts clean;
    Counts attacked;
    double clean_success = 0;
    double tvd_to_uniform = 0;  // attacked counts vs uniform over 3 bits
};

/// Five-qubit demonstration: Grover on qubits 0-2 with and without the
/// repeated-CNOT attack on qubits 3,4 under the shipped demo model.
AttackDemoResult run_attack_demo(const std::string& target, long long shots,
                                 std::uint64_t seed);

/// Long-format "radius,placement,fidelity" rows for plotting.
std::string sweep_to_csv(const SweepResult& sweep);
std::string table_to_csv(const PlacementComparison& table);

}  // namespace qxs

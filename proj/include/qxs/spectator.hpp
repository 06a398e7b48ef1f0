#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qxs/benchmarks.hpp"
#include "qxs/density_matrix.hpp"
#include "qxs/device.hpp"
#include "qxs/noise.hpp"
#include "qxs/rng.hpp"

namespace qxs {

/// Multiplier on the coherent components of gate-induced crosstalk used by
/// the shipped spectator scenario; pinned so the detection sweep peaks at a
/// single-digit waiting time.
double default_spectator_attack_scale();

/// Spectator-qubit detection setup. Times are in attack-gate units: the
/// attack CNOT takes 1 unit, the spectator measurement occupies 2.
struct SpectatorConfig {
    int spectator = 14;
    std::vector<int> data = {11};
    std::pair<int, int> attack = {12, 13};
    int tau = 7;                        // units between measure/reset cycles
    std::optional<int> flag_threshold;  // f0; default derived from cycles
    long long shots = 1000;
    double meas_flip = 0.01;
    double attack_fraction = 1.0;
    int duration = 100;  // total units per shot
    double attack_scale = default_spectator_attack_scale();
    std::uint64_t seed = 1;

    void validate() const;
    /// Complete measure/reset cycles fitting the duration at waiting time t.
    int cycles_at(int t) const { return duration / (t + 2); }
    /// f0 = max(1, ceil(3 * flip * cycles)): three times the expected
    /// flag count from measurement error alone.
    int default_threshold(int t) const;
    int threshold(int t) const;
};

/// Copy of the model with the coherent (h) part of every gate-induced entry
/// scaled; idle terms are untouched.
CrosstalkModel scale_attack_h(const CrosstalkModel& model, double factor);

struct BlochSample {
    int t = 0;
    BlochVector data;
    BlochVector spectator;
};

/// Exact trajectory of the first data qubit (prepared |+>) and the
/// spectator (|0>) while the attack pair fires every unit. No measurements.
std::vector<BlochSample> bloch_trajectory(const SpectatorConfig& config,
                                          const CrosstalkModel& model,
                                          const DeviceTopology& topo,
                                          const std::vector<int>& sample_times);

/// One shot of the measure/reset protocol; returns the flag count f.
int run_detection_shot(const SpectatorConfig& config, bool attacked,
                       const CrosstalkModel& model, const DeviceTopology& topo,
                       RandomStream& rng);

struct DetectionOutcome {
    long long attacked_shots = 0;
    long long clean_shots = 0;
    long long detected_attacked = 0;  // N_d
    long long detected_clean = 0;     // false positives
    double eta = 0;                   // N_d / attacked_shots
    double false_positive_rate = 0;
    long long total_flags = 0;
    double expected_clean_flags = 0;  // shots * cycles * flip
    int threshold = 0;
    int cycles = 0;
};

DetectionOutcome detection_rate(const SpectatorConfig& config,
                                const CrosstalkModel& model,
                                const DeviceTopology& topo, int workers = 0);

struct TauSweep {
    std::vector<std::pair<int, double>> points;  // (tau, eta)
    int best_tau = 0;
    double best_eta = 0;
};

/// eta per waiting time at attack fraction 1; reports the argmax.
TauSweep sweep_waiting_time(const SpectatorConfig& config,
                            const CrosstalkModel& model,
                            const DeviceTopology& topo,
                            const std::vector<int>& taus, int workers = 0);

struct PostSelectResult {
    Distribution all;
    Distribution retained;
    long long total_shots = 0;
    long long discarded_shots = 0;
    double retained_fraction = 0;
    // Retention among the shots that were never attacked; discarding these
    // is pure loss, so the detector should keep nearly all of them.
    double clean_retained_fraction = 0;
    bool all_discarded = false;
};

/// Two data qubits are Bell-entangled, idle under a possibly-attacked
/// detection window, disentangled and measured; shots whose spectator flag
/// count exceeds the threshold are discarded.
PostSelectResult post_select(const SpectatorConfig& config,
                             const CrosstalkModel& model,
                             const DeviceTopology& topo, int workers = 0);

std::string sweep_to_csv(const TauSweep& sweep);

}  // namespace qxs

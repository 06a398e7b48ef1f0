#include "qxs/spectator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qxs/parallel.hpp"

namespace qxs {

double default_spectator_attack_scale() { return 8.0; }

void SpectatorConfig::validate() const {
    if (spectator < 0) throw std::invalid_argument("bad spectator qubit");
    if (data.empty()) throw std::invalid_argument("no data qubits");
    if (attack.first == attack.second) {
        throw std::invalid_argument("attack pair must be distinct");
    }
    std::set<int> occupied(data.begin(), data.end());
    if (occupied.size() != data.size()) {
        throw std::invalid_argument("data qubits repeat");
    }
    occupied.insert(attack.first);
    occupied.insert(attack.second);
    if (occupied.count(spectator)) {
        throw std::invalid_argument("spectator overlaps data or attack");
    }
    if (occupied.size() != data.size() + 2) {
        throw std::invalid_argument("data overlaps attack");
    }
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (duration < tau + 2) {
        throw std::invalid_argument("duration too short for one cycle");
    }
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    if (meas_flip < 0 || meas_flip > 1 || attack_fraction < 0 ||
        attack_fraction > 1) {
        throw std::invalid_argument("fractions must lie in [0,1]");
    }
    if (attack_scale < 0) throw std::invalid_argument("negative attack scale");
    if (flag_threshold && *flag_threshold < 0) {
        throw std::invalid_argument("negative flag threshold");
    }
}

int SpectatorConfig::default_threshold(int t) const {
    return std::max(
        1, static_cast<int>(std::ceil(3.0 * meas_flip * cycles_at(t))));
}

int SpectatorConfig::threshold(int t) const {
    return flag_threshold ? *flag_threshold : default_threshold(t);
}

CrosstalkModel scale_attack_h(const CrosstalkModel& model, double factor) {
    CrosstalkModel out = model;
    for (auto& [key, victims] : out.gates) {
        for (auto& [q, rates] : victims) {
            for (double& h : rates.h) h *= factor;
        }
    }
    return out;
}

namespace {

struct SpectatorSim {
    std::vector<int> active;  // sorted physical indices
    int sq = 0;               // local indices below
    std::vector<int> data;
    Layer attack_layer;
    Layer empty_layer;
    NoiseSpec spec;
    NoiseSpec spec_sq_protected;  // SQ excluded during its own measurement
};

SpectatorSim build_sim(const SpectatorConfig& config,
                       const CrosstalkModel& model,
                       const DeviceTopology& topo) {
    config.validate();
    std::set<int> used(config.data.begin(), config.data.end());
    used.insert(config.spectator);
    used.insert(config.attack.first);
    used.insert(config.attack.second);
    for (int q : used) {
        if (q < 0 || q >= topo.qubit_count) {
            throw std::invalid_argument("qubit outside the device");
        }
    }
    SpectatorSim sim;
    sim.active.assign(used.begin(), used.end());
    if (static_cast<int>(sim.active.size()) > kMaxSimQubits) {
        throw std::invalid_argument("active subset exceeds simulator limit");
    }
    auto local = [&](int phys) {
        return static_cast<int>(
            std::lower_bound(sim.active.begin(), sim.active.end(), phys) -
            sim.active.begin());
    };
    sim.sq = local(config.spectator);
    for (int q : config.data) sim.data.push_back(local(q));
    sim.attack_layer = {Gate::cnot(local(config.attack.first),
                                   local(config.attack.second))};

    CrosstalkModel scaled = scale_attack_h(model, config.attack_scale);
    CrosstalkModel restricted = scaled.restricted(sim.active);
    CrosstalkModel protected_model = restricted;
    protected_model.idle.erase(sim.sq);
    for (auto& [key, victims] : protected_model.gates) {
        victims.erase(sim.sq);
    }
    sim.spec = NoiseSpec::with_crosstalk(std::move(restricted));
    sim.spec_sq_protected =
        NoiseSpec::with_crosstalk(std::move(protected_model));
    return sim;
}

void evolve_units(DensityMatrix& rho, const SpectatorSim& sim, bool attacked,
                  int units, bool protect_sq = false) {
    const NoiseSpec& spec =
        protect_sq ? sim.spec_sq_protected : sim.spec;
    for (int u = 0; u < units; ++u) {
        if (attacked) {
            apply_gate(rho, sim.attack_layer[0]);
            apply_layer_noise(rho, sim.attack_layer, spec, 1.0);
        } else {
            apply_layer_noise(rho, sim.empty_layer, spec, 1.0);
        }
    }
}

/// Runs the measure/reset cycles; returns the flag count and leaves the
/// data-qubit state in rho.
int run_cycles(DensityMatrix& rho, const SpectatorSim& sim,
               const SpectatorConfig& config, bool attacked,
               RandomStream& rng) {
    int cycles = config.cycles_at(config.tau);
    int flags = 0;
    for (int c = 0; c < cycles; ++c) {
        evolve_units(rho, sim, attacked, config.tau);
        int bit = measure_and_reset(rho, sim.sq, rng);
        if (config.meas_flip > 0 && rng.uniform() < config.meas_flip) {
            bit ^= 1;
        }
        flags += bit;
        evolve_units(rho, sim, attacked, 2, /*protect_sq=*/true);
    }
    return flags;
}

}  // namespace

std::vector<BlochSample> bloch_trajectory(
    const SpectatorConfig& config, const CrosstalkModel& model,
    const DeviceTopology& topo, const std::vector<int>& sample_times) {
    SpectatorSim sim = build_sim(config, model, topo);
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0 || sample_times[i] > config.duration) {
            throw std::invalid_argument("sample time outside the duration");
        }
        if (i > 0 && sample_times[i] <= sample_times[i - 1]) {
            throw std::invalid_argument("sample times must be sorted");
        }
    }
    DensityMatrix rho(static_cast<int>(sim.active.size()));
    for (int d : sim.data) apply_gate(rho, Gate::h(d));

    std::vector<BlochSample> out;
    int t = 0;
    auto record = [&](int at) {
        BlochSample s;
        s.t = at;
        s.data = bloch_vector(rho, sim.data[0]);
        s.spectator = bloch_vector(rho, sim.sq);
        out.push_back(s);
    };
    for (int target : sample_times) {
        evolve_units(rho, sim, /*attacked=*/true, target - t);
        t = target;
        record(t);
    }
    return out;
}

int run_detection_shot(const SpectatorConfig& config, bool attacked,
                       const CrosstalkModel& model, const DeviceTopology& topo,
                       RandomStream& rng) {
    SpectatorSim sim = build_sim(config, model, topo);
    DensityMatrix rho(static_cast<int>(sim.active.size()));
    for (int d : sim.data) apply_gate(rho, Gate::h(d));
    return run_cycles(rho, sim, config, attacked, rng);
}

DetectionOutcome detection_rate(const SpectatorConfig& config,
                                const CrosstalkModel& model,
                                const DeviceTopology& topo, int workers) {
    SpectatorSim sim = build_sim(config, model, topo);
    DetectionOutcome out;
    out.cycles = config.cycles_at(config.tau);
    out.threshold = config.threshold(config.tau);
    long long attacked_shots =
        std::llround(config.attack_fraction * double(config.shots));

    std::vector<int> flags(config.shots);
    parallel_for(std::size_t(config.shots), workers, [&](std::size_t i) {
        RandomStream rng = RandomStream::derived(config.seed, i);
        DensityMatrix rho(static_cast<int>(sim.active.size()));
        for (int d : sim.data) apply_gate(rho, Gate::h(d));
        bool attacked = static_cast<long long>(i) < attacked_shots;
        flags[i] = run_cycles(rho, sim, config, attacked, rng);
    });

    for (long long i = 0; i < config.shots; ++i) {
        bool attacked = i < attacked_shots;
        bool detected = flags[i] > out.threshold;
        out.total_flags += flags[i];
        if (attacked) {
            ++out.attacked_shots;
            if (detected) ++out.detected_attacked;
        } else {
            ++out.clean_shots;
            if (detected) ++out.detected_clean;
        }
    }
    if (out.attacked_shots > 0) {
        out.eta = double(out.detected_attacked) / double(out.attacked_shots);
    }
    if (out.clean_shots > 0) {
        out.false_positive_rate =
            double(out.detected_clean) / double(out.clean_shots);
    }
    out.expected_clean_flags =
        double(config.shots) * out.cycles * config.meas_flip;
    return out;
}

TauSweep sweep_waiting_time(const SpectatorConfig& config,
                            const CrosstalkModel& model,
                            const DeviceTopology& topo,
                            const std::vector<int>& taus, int workers) {
    if (taus.empty()) throw std::invalid_argument("empty tau range");
    TauSweep sweep;
    for (int t : taus) {
        SpectatorConfig c = config;
        c.tau = t;
        c.attack_fraction = 1.0;
        c.flag_threshold.reset();  // rescale f0 with the cycle count
        double eta = detection_rate(c, model, topo, workers).eta;
        sweep.points.emplace_back(t, eta);
        if (sweep.points.size() == 1 || eta > sweep.best_eta) {
            sweep.best_eta = eta;
            sweep.best_tau = t;
        }
    }
    return sweep;
}

PostSelectResult post_select(const SpectatorConfig& config,
                             const CrosstalkModel& model,
                             const DeviceTopology& topo, int workers) {
    if (config.data.size() != 2) {
        throw std::invalid_argument("post-selection needs 2 data qubits");
    }
    SpectatorSim sim = build_sim(config, model, topo);
    long long attacked_shots =
        std::llround(config.attack_fraction * double(config.shots));

    struct ShotRecord {
        std::string bits;
        bool flagged = false;
    };
    std::vector<ShotRecord> records(config.shots);
    parallel_for(std::size_t(config.shots), workers, [&](std::size_t i) {
        RandomStream rng = RandomStream::derived(config.seed, i);
        DensityMatrix rho(static_cast<int>(sim.active.size()));
        int d0 = sim.data[0], d1 = sim.data[1];
        apply_gate(rho, Gate::h(d0));
        apply_gate(rho, Gate::cnot(d0, d1));

        bool attacked = static_cast<long long>(i) < attacked_shots;
        int flags = run_cycles(rho, sim, config, attacked, rng);

        apply_gate(rho, Gate::cnot(d0, d1));
        apply_gate(rho, Gate::h(d0));
        std::string bits;
        for (int d : sim.data) {
            int bit = measure_and_project(rho, d, rng);
            if (config.meas_flip > 0 && rng.uniform() < config.meas_flip) {
                bit ^= 1;
            }
            bits += char('0' + bit);
        }
        records[i] = {bits, flags > config.threshold(config.tau)};
    });

    Counts all, retained;
    PostSelectResult out;
    out.total_shots = config.shots;
    long long clean_total = 0, clean_kept = 0;
    for (long long i = 0; i < config.shots; ++i) {
        const ShotRecord& r = records[i];
        all[r.bits] += 1;
        if (i >= attacked_shots) {
            ++clean_total;
            if (!r.flagged) ++clean_kept;
        }
        if (r.flagged) {
            ++out.discarded_shots;
        } else {
            retained[r.bits] += 1;
        }
    }
    if (clean_total > 0) {
        out.clean_retained_fraction = double(clean_kept) / double(clean_total);
    }
    out.all = normalize(all);
    out.all_discarded = retained.empty();
    if (!out.all_discarded) out.retained = normalize(retained);
    out.retained_fraction =
        double(config.shots - out.discarded_shots) / double(config.shots);
    return out;
}

std::string sweep_to_csv(const TauSweep& sweep) {
    std::ostringstream out;
    out << "tau,eta\n";
    out.precision(10);
    for (const auto& [t, eta] : sweep.points) {
        out << t << ',' << eta << '\n';
    }
    return out.str();
}

}  // namespace qxs

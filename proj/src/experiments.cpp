#include "qxs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qxs/parallel.hpp"
#include "qxs/simulate.hpp"

namespace qxs {

namespace {

Circuit strip_measurements(const Circuit& circuit) {
    Circuit out(circuit.qubits(), 0);
    for (const Layer& layer : circuit.layers()) {
        Layer nl;
        for (const Gate& g : layer) {
            if (g.kind == GateKind::MEASURE || g.kind == GateKind::RESET) {
                continue;
            }
            nl.push_back(g);
        }
        if (!nl.empty()) out.append_layer(nl);
    }
    return out;
}

struct PlacedSetup {
    Circuit combined;             // on the local active register
    Circuit logical;              // measurement-free victim
    std::vector<int> victim_local;  // local indices in victim logical order
    NoiseSpec spec;
    // When an out-of-reach attack is elided its lockstep schedule must
    // still stretch every layer to the two-qubit gate duration.
    double min_layer_duration = 0;
};

PlacedSetup prepare_placed(const Circuit& victim, const Placement& place,
                           std::optional<std::pair<int, int>> attack,
                           const CrosstalkModel& model,
                           const DeviceTopology& topo) {
    if (static_cast<int>(place.size()) != victim.qubits()) {
        throw std::invalid_argument("placement size != victim qubit count");
    }
    std::set<int> used;
    for (int p : place) {
        if (p < 0 || p >= topo.qubit_count) {
            throw std::invalid_argument("placement qubit out of range");
        }
        if (!used.insert(p).second) {
            throw std::invalid_argument("placement repeats a physical qubit");
        }
    }
    bool attack_elided = false;
    if (attack) {
        if (used.count(attack->first) || used.count(attack->second)) {
            throw std::invalid_argument("attack overlaps victim placement");
        }
        // The channels are strictly local, so an attack whose victim set
        // misses the placement entirely cannot change the victim marginal;
        // simulating it would only enlarge the register.
        bool touches = false;
        for (const std::string& key :
             {gate_key(GateKind::CNOT, attack->first, attack->second),
              gate_key(GateKind::CNOT, attack->second, attack->first)}) {
            auto it = model.gates.find(key);
            if (it == model.gates.end()) continue;
            for (const auto& [v, rates] : it->second) {
                if (used.count(v) && !rates.is_zero()) touches = true;
            }
        }
        if (touches) {
            used.insert(attack->first);
            used.insert(attack->second);
        } else {
            attack.reset();
            attack_elided = true;
        }
    }
    std::vector<int> active(used.begin(), used.end());
    if (static_cast<int>(active.size()) > kMaxSimQubits) {
        throw std::invalid_argument("active subset exceeds simulator limit");
    }
    auto local = [&](int phys) {
        return static_cast<int>(
            std::lower_bound(active.begin(), active.end(), phys) -
            active.begin());
    };

    PlacedSetup setup;
    setup.logical = strip_measurements(victim);
    std::vector<int> map(place.size());
    for (std::size_t i = 0; i < place.size(); ++i) {
        map[i] = local(place[i]);
        setup.victim_local.push_back(map[i]);
    }
    Circuit placed =
        setup.logical.remapped(map, static_cast<int>(active.size()));
    if (attack) {
        placed = schedule_with_attack(placed, local(attack->first),
                                      local(attack->second));
    }
    setup.combined = std::move(placed);
    setup.spec = NoiseSpec::with_crosstalk(model.restricted(active));
    if (attack_elided) {
        setup.min_layer_duration = gate_duration(GateKind::CNOT);
    }
    return setup;
}

DensityMatrix victim_marginal(const PlacedSetup& setup) {
    if (setup.min_layer_duration > 0) {
        DensityMatrix rho(setup.combined.qubits());
        for (const Layer& layer : setup.combined.layers()) {
            for (const Gate& g : layer) {
                if (is_unitary_kind(g.kind)) apply_gate(rho, g);
            }
            apply_layer_noise(rho, layer, setup.spec,
                              std::max(layer_duration(layer),
                                       setup.min_layer_duration));
        }
        return partial_trace(rho, setup.victim_local);
    }
    DensityMatrix rho = simulate_state(setup.combined, setup.spec);
    return partial_trace(rho, setup.victim_local);
}

}  // namespace

double placed_fidelity(const Circuit& victim, const Placement& victim_place,
                       std::optional<std::pair<int, int>> attack,
                       const CrosstalkModel& model,
                       const DeviceTopology& topo) {
    PlacedSetup setup =
        prepare_placed(victim, victim_place, attack, model, topo);
    return state_fidelity(statevector(setup.logical), victim_marginal(setup));
}

double placed_success(const Circuit& victim, const Placement& victim_place,
                      std::optional<std::pair<int, int>> attack,
                      const CrosstalkModel& model, const DeviceTopology& topo,
                      const std::string& target) {
    PlacedSetup setup =
        prepare_placed(victim, victim_place, attack, model, topo);
    return success_probability(victim_marginal(setup), target);
}

SummaryStats summarize(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        double pos = q * double(values.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        double frac = pos - double(lo);
        if (lo + 1 >= values.size()) return values.back();
        return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
    };
    SummaryStats s;
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / double(values.size());
    return s;
}

SweepResult run_separation_sweep(const Circuit& victim,
                                 const Placement& victim_place,
                                 const std::vector<int>& radii,
                                 const CrosstalkModel& model,
                                 const DeviceTopology& topo,
                                 const Calibration* cal, int workers) {
    for (std::size_t i = 1; i < radii.size(); ++i) {
        if (radii[i] <= radii[i - 1]) {
            throw std::invalid_argument("radii must be sorted ascending");
        }
    }
    PlacementConstraints cons;
    cons.forbidden = victim_place;
    cons.min_radius = 0;
    std::vector<Placement> attacks =
        enumerate_placements(topo, CircuitShape::line(2), cons, cal);
    // A CNOT pair is direction-symmetric under the model; keep the
    // ascending orientation only.
    attacks.erase(std::remove_if(attacks.begin(), attacks.end(),
                                 [](const Placement& p) {
                                     return p[0] > p[1];
                                 }),
                  attacks.end());

    SweepResult sweep;
    std::vector<std::pair<int, Placement>> tasks;  // (bucket index, attack)
    for (int r : radii) {
        SweepResult::Bucket bucket;
        bucket.radius = r;
        sweep.buckets.push_back(bucket);
    }
    for (const Placement& a : attacks) {
        int r = separation_radius(topo, victim_place, a);
        for (std::size_t b = 0; b < radii.size(); ++b) {
            if (radii[b] == r) tasks.emplace_back(static_cast<int>(b), a);
        }
    }
    std::vector<double> fidelities(tasks.size());
    parallel_for(tasks.size(), workers, [&](std::size_t i) {
        const Placement& a = tasks[i].second;
        fidelities[i] = placed_fidelity(victim, victim_place,
                                        std::make_pair(a[0], a[1]), model,
                                        topo);
    });
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        sweep.buckets[tasks[i].first].entries.emplace_back(tasks[i].second,
                                                           fidelities[i]);
    }
    for (SweepResult::Bucket& bucket : sweep.buckets) {
        std::sort(bucket.entries.begin(), bucket.entries.end());
        std::vector<double> vals;
        for (const auto& [p, f] : bucket.entries) vals.push_back(f);
        bucket.stats = summarize(vals);
    }
    return sweep;
}

PlacementComparison run_placement_table(
    const Circuit& victim, const std::vector<Placement>& candidates,
    std::pair<int, int> attack, const CrosstalkModel& model,
    const DeviceTopology& topo, const std::string& success_target,
    int workers) {
    if (candidates.empty()) throw std::invalid_argument("no candidates");
    PlacementComparison table;
    table.rows.resize(candidates.size());
    parallel_for(candidates.size(), workers, [&](std::size_t i) {
        PlacementComparison::Row& row = table.rows[i];
        row.placement = candidates[i];
        row.radius = separation_radius(topo, candidates[i],
                                       {attack.first, attack.second});
        row.fidelity =
            placed_fidelity(victim, candidates[i], attack, model, topo);
        if (!success_target.empty()) {
            row.success = placed_success(victim, candidates[i], attack, model,
                                         topo, success_target);
        }
    });
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (table.rows[i].fidelity > table.rows[table.best].fidelity) {
            table.best = i;
        }
    }
    return table;
}

AttackDemoResult run_attack_demo(const std::string& target, long long shots,
                                 std::uint64_t seed) {
    AttackDemoResult out;
    Circuit grover = build_grover3(target, true);
    out.clean = simulate_counts(grover, NoiseSpec::none(), shots,
                                mix64(seed ^ 0x636c65616eULL));
    Eigen::VectorXcd psi = statevector(build_grover3(target, false));
    out.clean_success =
        std::norm(psi(std::stoi(target, nullptr, 2)));

    Circuit attacked = build_attack(target);
    NoiseSpec spec = NoiseSpec::with_crosstalk(attack_demo_model());
    out.attacked = simulate_counts(attacked, spec, shots, seed);
    out.tvd_to_uniform = tvd(out.attacked, uniform_distribution(3));
    return out;
}

namespace {

std::string placement_label(const Placement& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(p[i]);
    }
    return s;
}

}  // namespace

std::string sweep_to_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "radius,placement,fidelity\n";
    out.precision(10);
    for (const SweepResult::Bucket& bucket : sweep.buckets) {
        for (const auto& [p, f] : bucket.entries) {
            out << bucket.radius << ',' << placement_label(p) << ',' << f
                << '\n';
        }
    }
    return out.str();
}

std::string table_to_csv(const PlacementComparison& table) {
    std::ostringstream out;
    out << "placement,radius,fidelity,success,best\n";
    out.precision(10);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const PlacementComparison::Row& r = table.rows[i];
        out << placement_label(r.placement) << ',' << r.radius << ','
            << r.fidelity << ',' << r.success << ','
            << (i == table.best ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace qxs

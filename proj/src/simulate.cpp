#include "qxs/simulate.hpp"

#include <algorithm>
#include <stdexcept>

namespace qxs {

namespace {

void check_noise_coverage(const Circuit& circuit, const NoiseSpec& noise) {
    if (noise.kind == NoiseKind::Baseline || noise.kind == NoiseKind::Combined) {
        if (!noise.baseline ||
            static_cast<int>(noise.baseline->t1.size()) < circuit.qubits()) {
            throw std::invalid_argument(
                "baseline noise does not cover all circuit qubits");
        }
    }
    if ((noise.kind == NoiseKind::Crosstalk ||
         noise.kind == NoiseKind::Combined) &&
        !noise.crosstalk) {
        throw std::invalid_argument("crosstalk noise spec missing model");
    }
}

void apply_layer_unitaries(DensityMatrix& rho, const Layer& layer) {
    for (const Gate& g : layer) {
        if (is_unitary_kind(g.kind)) apply_gate(rho, g);
    }
}

std::string bits_to_string(const std::vector<int>& bits) {
    std::string out(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out[i] = '1';
    }
    return out;
}

}  // namespace

DensityMatrix simulate_state(const Circuit& circuit, const NoiseSpec& noise,
                             bool debug_checks) {
    circuit.validate();
    check_noise_coverage(circuit, noise);
    if (circuit.has_measurement()) {
        throw std::invalid_argument(
            "simulate_state requires a measurement-free circuit");
    }
    DensityMatrix rho(circuit.qubits());
    for (const Layer& layer : circuit.layers()) {
        apply_layer_unitaries(rho, layer);
        apply_layer_noise(rho, layer, noise);
        if (debug_checks) rho.check_physical();
    }
    return rho;
}

DensityMatrix simulate_premeasure_state(const Circuit& circuit,
                                        const NoiseSpec& noise) {
    if (circuit.has_mid_circuit_measurement()) {
        throw std::invalid_argument("mid-circuit measurement");
    }
    Circuit stripped(circuit.qubits(), 0);
    for (const Layer& layer : circuit.layers()) {
        Layer nl;
        for (const Gate& g : layer) {
            if (g.kind == GateKind::MEASURE || g.kind == GateKind::RESET) {
                continue;  // terminal readout only, by the check above
            }
            nl.push_back(g);
        }
        if (!nl.empty()) stripped.append_layer(nl);
    }
    return simulate_state(stripped, noise);
}

Eigen::VectorXcd statevector(const Circuit& circuit) {
    circuit.validate();
    if (circuit.has_measurement()) {
        throw std::invalid_argument("statevector requires unitary circuit");
    }
    int n = circuit.qubits();
    Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(0) = 1.0;
    for (const Layer& layer : circuit.layers()) {
        for (const Gate& g : layer) {
            if (!is_unitary_kind(g.kind)) continue;
            if (g.kind == GateKind::CNOT) {
                int cs = n - 1 - g.operands[0], ts = n - 1 - g.operands[1];
                for (Eigen::Index idx = 0; idx < dim; ++idx) {
                    if (((idx >> cs) & 1) && !((idx >> ts) & 1)) {
                        std::swap(psi(idx), psi(idx | (Eigen::Index(1) << ts)));
                    }
                }
                continue;
            }
            Matrix2c u = gate_unitary_1q(g.kind, g.angle);
            int shift = n - 1 - g.operands[0];
            for (Eigen::Index idx = 0; idx < dim; ++idx) {
                if ((idx >> shift) & 1) continue;
                Eigen::Index i1 = idx | (Eigen::Index(1) << shift);
                Complex a = psi(idx), b = psi(i1);
                psi(idx) = u(0, 0) * a + u(0, 1) * b;
                psi(i1) = u(1, 0) * a + u(1, 1) * b;
            }
        }
    }
    return psi;
}

namespace {

Counts sample_terminal(const Circuit& circuit, const NoiseSpec& noise,
                       long long shots, std::uint64_t seed) {
    // Exact evolution of the unitary prefix, then shot sampling over the
    // classical-bit marginal.
    Circuit prefix(circuit.qubits(), 0);
    std::vector<std::pair<int, int>> measures;  // (qubit, cbit)
    for (const Layer& layer : circuit.layers()) {
        Layer nl;
        for (const Gate& g : layer) {
            if (g.kind == GateKind::MEASURE) {
                measures.emplace_back(g.operands[0], *g.cbit);
            } else {
                nl.push_back(g);
            }
        }
        if (!nl.empty()) prefix.append_layer(nl);
    }
    DensityMatrix rho = simulate_state(prefix, noise);
    Eigen::VectorXd probs = diagonal_probabilities(rho);
    double total = probs.sum();
    if (total <= 0) throw std::runtime_error("vanishing outcome distribution");
    probs /= total;

    int n = circuit.qubits();
    Counts counts;
    RandomStream rng = RandomStream::derived(seed, 0);
    for (long long shot = 0; shot < shots; ++shot) {
        double r = rng.uniform();
        Eigen::Index idx = 0;
        double acc = 0;
        for (; idx < probs.size(); ++idx) {
            acc += probs(idx);
            if (r < acc) break;
        }
        if (idx == probs.size()) idx = probs.size() - 1;
        std::vector<int> cbits(circuit.cbits(), 0);
        for (const auto& [q, c] : measures) {
            int bit = (idx >> (n - 1 - q)) & 1;
            double flip = noise.readout_flip(q);
            if (flip > 0 && rng.uniform() < flip) bit ^= 1;
            cbits[c] = bit;
        }
        counts[bits_to_string(cbits)] += 1;
    }
    return counts;
}

Counts sample_trajectories(const Circuit& circuit, const NoiseSpec& noise,
                           long long shots, std::uint64_t seed) {
    Counts counts;
    for (long long shot = 0; shot < shots; ++shot) {
        RandomStream rng = RandomStream::derived(seed, std::uint64_t(shot) + 1);
        DensityMatrix rho(circuit.qubits());
        std::vector<int> cbits(circuit.cbits(), 0);
        for (const Layer& layer : circuit.layers()) {
            for (const Gate& g : layer) {
                if (is_unitary_kind(g.kind)) {
                    apply_gate(rho, g);
                } else if (g.kind == GateKind::MEASURE) {
                    int bit = measure_and_project(rho, g.operands[0], rng);
                    double flip = noise.readout_flip(g.operands[0]);
                    if (flip > 0 && rng.uniform() < flip) bit ^= 1;
                    cbits[*g.cbit] = bit;
                } else if (g.kind == GateKind::RESET) {
                    measure_and_reset(rho, g.operands[0], rng);
                }
            }
            apply_layer_noise(rho, layer, noise);
        }
        counts[bits_to_string(cbits)] += 1;
    }
    return counts;
}

}  // namespace

Counts simulate_counts(const Circuit& circuit, const NoiseSpec& noise,
                       long long shots, std::uint64_t seed) {
    circuit.validate();
    check_noise_coverage(circuit, noise);
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    if (!circuit.has_measurement()) {
        throw std::invalid_argument("circuit has no measurements");
    }
    if (circuit.has_mid_circuit_measurement()) {
        return sample_trajectories(circuit, noise, shots, seed);
    }
    return sample_terminal(circuit, noise, shots, seed);
}

SimResult simulate(const Circuit& circuit, const NoiseSpec& noise,
                   long long shots, std::uint64_t seed) {
    SimResult out;
    if (circuit.has_measurement()) {
        out.counts = simulate_counts(circuit, noise, shots, seed);
    } else {
        out.state = simulate_state(circuit, noise);
    }
    return out;
}

}  // namespace qxs

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qxs/circuit.hpp"
#include "qxs/density_matrix.hpp"

namespace qxs {

struct DeviceTopology;
struct Calibration;

/// Per-axis error generator rates for one qubit, all per time unit:
/// `h` coherent over-rotation (radians), `s` stochastic Pauli probabilities,
/// `a` affine Bloch displacement.
struct HsaRates {
    std::array<double, 3> h{0, 0, 0};
    std::array<double, 3> s{0, 0, 0};
    std::array<double, 3> a{0, 0, 0};

    bool is_zero() const;
    void validate() const;
    HsaRates& operator+=(const HsaRates& other);
    HsaRates scaled(double factor) const;
};

/// Maps firing gates to the HSA errors they induce on nearby victim qubits,
/// plus a per-qubit idle background applied per idle time unit.
struct CrosstalkModel {
    std::map<int, HsaRates> idle;
    // Key "cnot:12,13" (ordered operands) -> victim qubit -> rates per unit
    // of gate duration.
    std::map<std::string, std::map<int, HsaRates>> gates;
    // In strict mode a fired 2-qubit gate without a model entry is an error.
    bool strict = false;

    void validate(int qubit_count) const;
    bool all_zero() const;

    std::string to_json() const;
    static CrosstalkModel from_json(const std::string& text, int qubit_count);

    /// Model over the active subset `physical` (position i becomes local
    /// qubit i). Entries whose victims or operands fall outside the subset
    /// are dropped.
    CrosstalkModel restricted(const std::vector<int>& physical) const;
};

std::string gate_key(GateKind kind, int a, int b);

/// Calibration-derived model without crosstalk terms: relaxation, dephasing,
/// two-qubit depolarizing and readout flips.
struct BaselineNoise {
    std::vector<double> t1;  // time units
    std::vector<double> t2;  // time units
    std::map<std::pair<int, int>, double> cx_depol;  // unordered edge key a<b
    std::vector<double> readout_flip;

    void validate() const;
};

enum class NoiseKind { None, Baseline, Crosstalk, Combined };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    std::optional<BaselineNoise> baseline;
    std::optional<CrosstalkModel> crosstalk;

    static NoiseSpec none() { return {}; }
    static NoiseSpec with_crosstalk(CrosstalkModel m) {
        return {NoiseKind::Crosstalk, {}, std::move(m)};
    }
    static NoiseSpec with_baseline(BaselineNoise b) {
        return {NoiseKind::Baseline, std::move(b), {}};
    }
    static NoiseSpec combined(BaselineNoise b, CrosstalkModel m) {
        return {NoiseKind::Combined, std::move(b), std::move(m)};
    }

    bool enabled() const { return kind != NoiseKind::None; }
    double readout_flip(int q) const;
};

/// One HSA application on qubit q for duration dt. Order is Hamiltonian,
/// then stochastic, then affine; the affine step eigenvalue-clips back to
/// the physical set.
void apply_hsa(DensityMatrix& rho, int q, const HsaRates& rates, double dt);

/// Noise for one circuit layer, applied after the layer's unitaries.
void apply_layer_noise(DensityMatrix& rho, const Layer& layer,
                       const NoiseSpec& spec);

/// Same with an explicit elapsed time for the idle/relaxation channels
/// (gate-induced terms still use the gate's own duration).
void apply_layer_noise(DensityMatrix& rho, const Layer& layer,
                       const NoiseSpec& spec, double dt);

struct SynthOptions {
    // Fraction of the per-victim magnitude assigned to each component. The
    // transverse h_X share is what a ground-state spectator responds to.
    double hx_share = 0.5;
    double hz_share = -0.2;
    double sx_share = 0.3;
    double idle_rate = 3e-4;  // uniform idle stochastic budget per unit
    // Optional per-edge strength multipliers (key a<b) and per-qubit extra
    // idle dephasing, both default to none.
    std::map<std::pair<int, int>, double> edge_weights;
    std::map<int, double> idle_sz;
};

/// Synthetic distance-decay crosstalk model: a victim at graph distance d
/// from a fired edge receives magnitude alpha * beta^(d-1), up to `cutoff`.
CrosstalkModel synth_default_model(const DeviceTopology& topo, double alpha,
                                   double beta, int cutoff,
                                   const SynthOptions& opts = {});

/// The shipped 27-qubit model: synth_default_model with per-edge weights
/// from the bundled calibration's CX errors and idle dephasing from T2.
CrosstalkModel default_device_model(const DeviceTopology& topo,
                                    const Calibration& cal);


/// Shipped calibration constants for default_device_model.
struct DefaultModelParams {
    double alpha;
    double beta;
    int cutoff;
    double idle_kappa;  // scale on excess 1/T2 dephasing
};
DefaultModelParams default_model_params();
/// default_device_model with explicit strength constants.
CrosstalkModel device_model_with_params(const DeviceTopology& topo,
                                        const Calibration& cal,
                                        const DefaultModelParams& params);

BaselineNoise baseline_from_calibration(const Calibration& cal);

CrosstalkModel load_model(const std::string& path, int qubit_count);
void save_model(const CrosstalkModel& model, const std::string& path);

}  // namespace qxs

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qxs/circuit.hpp"
#include "qxs/rng.hpp"

namespace qxs {

inline constexpr int kMaxSimQubits = 12;

using Counts = std::map<std::string, long long>;

struct BlochVector {
    double x = 0, y = 0, z = 0;
};

/// Exact density matrix over n qubits. Qubit 0 owns the most significant bit
/// of the basis index, so |q0 q1 ... q_{n-1}> maps to index
/// sum_q bit_q << (n-1-q) and bitstrings read left to right in qubit order.
class DensityMatrix {
  public:
    explicit DensityMatrix(int qubits);
    DensityMatrix(int qubits, Eigen::MatrixXcd data);

    /// |bits> <bits| computational basis state, bits given as e.g. "110".
    static DensityMatrix basis_state(const std::string& bits);
    static DensityMatrix from_statevector(const Eigen::VectorXcd& psi);
    static DensityMatrix maximally_mixed(int qubits);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return data_.rows(); }
    const Eigen::MatrixXcd& data() const { return data_; }
    Eigen::MatrixXcd& data() { return data_; }

    double trace_real() const { return data_.trace().real(); }

    /// Hermiticity / unit trace / positive semidefiniteness, within the
    /// documented tolerances. Throws std::runtime_error when violated.
    void check_physical(double psd_tol = 1e-9) const;

    /// Clips negative eigenvalues to zero and renormalizes the trace.
    void clip_to_physical();

  private:
    int qubits_;
    Eigen::MatrixXcd data_;
};

/// rho <- U rho U^dagger with the 2^k x 2^k unitary embedded at `targets`
/// (targets.size() == k, k in {1,2,3}).
void apply_unitary(DensityMatrix& rho, const Eigen::MatrixXcd& u,
                   const std::vector<int>& targets);

void apply_gate(DensityMatrix& rho, const Gate& gate);

/// Applies a single-qubit Kraus channel {K_i} on qubit q.
void apply_kraus_1q(DensityMatrix& rho, const std::vector<Matrix2c>& kraus,
                    int q);

/// Born-rule sample of qubit q followed by projection and reset to |0>.
/// Returns the sampled bit.
int measure_and_reset(DensityMatrix& rho, int q, RandomStream& rng);

/// Born-rule sample of qubit q with projection (no reset).
int measure_and_project(DensityMatrix& rho, int q, RandomStream& rng);

/// P(qubit q = 1).
double prob_one(const DensityMatrix& rho, int q);

/// Reduced state over `keep` (qubit order preserved).
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);

BlochVector bloch_vector(const DensityMatrix& rho, int q);

/// <psi| rho |psi> for a normalized pure state.
double state_fidelity(const Eigen::VectorXcd& psi, const DensityMatrix& rho);

/// <target| rho |target>.
double success_probability(const DensityMatrix& rho, const std::string& target);

/// Diagonal of rho as outcome probabilities, indexed by basis state.
Eigen::VectorXd diagonal_probabilities(const DensityMatrix& rho);

}  // namespace qxs

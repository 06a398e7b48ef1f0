#include "qxs/density_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace qxs {

DensityMatrix::DensityMatrix(int qubits) : qubits_(qubits) {
    if (qubits <= 0 || qubits > kMaxSimQubits) {
        throw std::invalid_argument("qubit count out of range");
    }
    Eigen::Index d = Eigen::Index(1) << qubits;
    data_ = Eigen::MatrixXcd::Zero(d, d);
    data_(0, 0) = 1.0;
}

DensityMatrix::DensityMatrix(int qubits, Eigen::MatrixXcd data)
    : qubits_(qubits), data_(std::move(data)) {
    Eigen::Index d = Eigen::Index(1) << qubits;
    if (data_.rows() != d || data_.cols() != d) {
        throw std::invalid_argument("density matrix dimension mismatch");
    }
}

DensityMatrix DensityMatrix::basis_state(const std::string& bits) {
    int n = static_cast<int>(bits.size());
    DensityMatrix rho(n);
    Eigen::Index idx = 0;
    for (char c : bits) {
        idx = (idx << 1) | (c == '1' ? 1 : 0);
    }
    rho.data_.setZero();
    rho.data_(idx, idx) = 1.0;
    return rho;
}

DensityMatrix DensityMatrix::from_statevector(const Eigen::VectorXcd& psi) {
    int n = 0;
    while ((Eigen::Index(1) << n) < psi.size()) ++n;
    if ((Eigen::Index(1) << n) != psi.size()) {
        throw std::invalid_argument("statevector length not a power of two");
    }
    return DensityMatrix(n, psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int qubits) {
    DensityMatrix rho(qubits);
    Eigen::Index d = rho.dim();
    rho.data_ = Eigen::MatrixXcd::Identity(d, d) / double(d);
    return rho;
}

void DensityMatrix::check_physical(double psd_tol) const {
    double herm = (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw std::runtime_error("density matrix not Hermitian");
    if (std::abs(trace_real() - 1.0) > 1e-10) {
        throw std::runtime_error("density matrix trace != 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(data_,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -psd_tol) {
        throw std::runtime_error("density matrix not PSD");
    }
}

void DensityMatrix::clip_to_physical() {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(data_);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    double tr = vals.sum();
    if (tr <= 0) throw std::runtime_error("state clipped to zero trace");
    vals /= tr;
    data_ = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// Enumerates basis indices grouped by the bit pattern on `targets`: for each
// assignment of the remaining bits, yields the 2^k indices obtained by
// varying the target bits.
struct SubspaceIndexer {
    SubspaceIndexer(int qubits, const std::vector<int>& targets)
        : shifts(targets.size()) {
        int n = qubits;
        Eigen::Index target_mask = 0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            shifts[i] = n - 1 - targets[i];
            target_mask |= Eigen::Index(1) << shifts[i];
        }
        Eigen::Index dim = Eigen::Index(1) << n;
        rest.reserve(dim >> targets.size());
        for (Eigen::Index idx = 0; idx < dim; ++idx) {
            if ((idx & target_mask) == 0) rest.push_back(idx);
        }
    }

    Eigen::Index index(Eigen::Index base, unsigned pattern) const {
        Eigen::Index idx = base;
        for (std::size_t i = 0; i < shifts.size(); ++i) {
            if (pattern & (1u << (shifts.size() - 1 - i))) {
                idx |= Eigen::Index(1) << shifts[i];
            }
        }
        return idx;
    }

    std::vector<int> shifts;
    std::vector<Eigen::Index> rest;
};

}  // namespace

void apply_unitary(DensityMatrix& rho, const Eigen::MatrixXcd& u,
                   const std::vector<int>& targets) {
    int k = static_cast<int>(targets.size());
    Eigen::Index sub = Eigen::Index(1) << k;
    if (u.rows() != sub || u.cols() != sub) {
        throw std::invalid_argument("unitary dimension mismatch");
    }
    for (int q : targets) {
        if (q < 0 || q >= rho.qubits()) {
            throw std::invalid_argument("operand out of range");
        }
    }
    Eigen::MatrixXcd& m = rho.data();
    Eigen::Index dim = m.rows();
    if (k == 1) {
        // In-place 2x2 block update over bit pairs; the generic path below
        // allocates per column and dominates noisy-simulation profiles.
        Eigen::Index bit = Eigen::Index(1) << (rho.qubits() - 1 - targets[0]);
        const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0),
                      u11 = u(1, 1);
        for (Eigen::Index r = 0; r < dim; ++r) {
            if (r & bit) continue;
            for (Eigen::Index c = 0; c < dim; ++c) {
                Complex a = m(r, c), b = m(r | bit, c);
                m(r, c) = u00 * a + u01 * b;
                m(r | bit, c) = u10 * a + u11 * b;
            }
        }
        const Complex d00 = std::conj(u00), d01 = std::conj(u01),
                      d10 = std::conj(u10), d11 = std::conj(u11);
        for (Eigen::Index c = 0; c < dim; ++c) {
            if (c & bit) continue;
            for (Eigen::Index r = 0; r < dim; ++r) {
                Complex a = m(r, c), b = m(r, c | bit);
                m(r, c) = a * d00 + b * d01;
                m(r, c | bit) = a * d10 + b * d11;
            }
        }
        return;
    }
    SubspaceIndexer ix(rho.qubits(), targets);
    Eigen::VectorXcd tmp(sub);
    // Left multiply by U: mix rows within each target-bit subspace.
    for (Eigen::Index base : ix.rest) {
        for (Eigen::Index col = 0; col < dim; ++col) {
            for (unsigned p = 0; p < sub; ++p) tmp(p) = m(ix.index(base, p), col);
            Eigen::VectorXcd out = u * tmp;
            for (unsigned p = 0; p < sub; ++p) m(ix.index(base, p), col) = out(p);
        }
    }
    // Right multiply by U^dagger: mix columns.
    Eigen::MatrixXcd ud = u.adjoint();
    for (Eigen::Index base : ix.rest) {
        for (Eigen::Index row = 0; row < dim; ++row) {
            for (unsigned p = 0; p < sub; ++p) tmp(p) = m(row, ix.index(base, p));
            Eigen::VectorXcd out = ud.transpose() * tmp;
            for (unsigned p = 0; p < sub; ++p) m(row, ix.index(base, p)) = out(p);
        }
    }
}

void apply_gate(DensityMatrix& rho, const Gate& gate) {
    if (!is_unitary_kind(gate.kind)) {
        throw std::invalid_argument("apply_gate requires a unitary kind");
    }
    if (gate.kind == GateKind::CNOT) {
        // Basis permutation: flip the target bit wherever the control bit is
        // set, on rows and columns.
        Eigen::MatrixXcd& m = rho.data();
        Eigen::Index dim = m.rows();
        Eigen::Index ctrl = Eigen::Index(1)
                            << (rho.qubits() - 1 - gate.operands[0]);
        Eigen::Index tgt = Eigen::Index(1)
                           << (rho.qubits() - 1 - gate.operands[1]);
        for (Eigen::Index r = 0; r < dim; ++r) {
            if ((r & ctrl) && !(r & tgt)) m.row(r).swap(m.row(r | tgt));
        }
        for (Eigen::Index c = 0; c < dim; ++c) {
            if ((c & ctrl) && !(c & tgt)) m.col(c).swap(m.col(c | tgt));
        }
        return;
    }
    apply_unitary(rho, gate_unitary_1q(gate.kind, gate.angle), gate.operands);
}

void apply_kraus_1q(DensityMatrix& rho, const std::vector<Matrix2c>& kraus,
                    int q) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
    for (const Matrix2c& k : kraus) {
        DensityMatrix branch = rho;
        apply_unitary(branch, k, {q});  // works for non-unitary K as well
        acc += branch.data();
    }
    rho.data() = std::move(acc);
}

double prob_one(const DensityMatrix& rho, int q) {
    if (q < 0 || q >= rho.qubits()) {
        throw std::invalid_argument("qubit out of range");
    }
    int shift = rho.qubits() - 1 - q;
    double p1 = 0;
    for (Eigen::Index idx = 0; idx < rho.dim(); ++idx) {
        if ((idx >> shift) & 1) p1 += rho.data()(idx, idx).real();
    }
    return p1;
}

namespace {

void project(DensityMatrix& rho, int q, int bit, double prob) {
    if (prob < 1e-12) {
        throw std::runtime_error("projection onto probability-zero branch");
    }
    int shift = rho.qubits() - 1 - q;
    Eigen::MatrixXcd& m = rho.data();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        bool keep_r = (((r >> shift) & 1) == bit);
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            bool keep_c = (((c >> shift) & 1) == bit);
            if (!keep_r || !keep_c) m(r, c) = 0.0;
        }
    }
    m /= prob;
}

}  // namespace

int measure_and_project(DensityMatrix& rho, int q, RandomStream& rng) {
    double p1 = prob_one(rho, q);
    int bit = rng.uniform() < p1 ? 1 : 0;
    project(rho, q, bit, bit ? p1 : 1.0 - p1);
    return bit;
}

int measure_and_reset(DensityMatrix& rho, int q, RandomStream& rng) {
    int bit = measure_and_project(rho, q, rng);
    if (bit == 1) apply_gate(rho, Gate::x(q));  // q is pure |1> after projection
    return bit;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("empty keep set");
    int n = rho.qubits();
    for (int q : keep) {
        if (q < 0 || q >= n) throw std::invalid_argument("qubit out of range");
    }
    int k = static_cast<int>(keep.size());
    Eigen::Index kd = Eigen::Index(1) << k;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(kd, kd);
    // Maps a full basis index to (kept bits, traced bits).
    auto split = [&](Eigen::Index idx) {
        Eigen::Index kept = 0;
        for (int i = 0; i < k; ++i) {
            int shift = n - 1 - keep[i];
            kept = (kept << 1) | ((idx >> shift) & 1);
        }
        return kept;
    };
    std::vector<bool> is_kept(n, false);
    for (int q : keep) is_kept[q] = true;
    Eigen::Index dim = rho.dim();
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            bool same_rest = true;
            for (int q = 0; q < n && same_rest; ++q) {
                if (is_kept[q]) continue;
                int shift = n - 1 - q;
                same_rest = ((r >> shift) & 1) == ((c >> shift) & 1);
            }
            if (same_rest) out(split(r), split(c)) += rho.data()(r, c);
        }
    }
    return DensityMatrix(k, std::move(out));
}

BlochVector bloch_vector(const DensityMatrix& rho, int q) {
    DensityMatrix r1 = partial_trace(rho, {q});
    const Eigen::MatrixXcd& m = r1.data();
    BlochVector b;
    b.x = 2.0 * m(0, 1).real();
    b.y = -2.0 * m(0, 1).imag();
    b.z = (m(0, 0) - m(1, 1)).real();
    return b;
}

double state_fidelity(const Eigen::VectorXcd& psi, const DensityMatrix& rho) {
    if (psi.size() != rho.dim()) {
        throw std::invalid_argument("dimension mismatch");
    }
    return (psi.adjoint() * rho.data() * psi)(0, 0).real();
}

double success_probability(const DensityMatrix& rho, const std::string& target) {
    if (static_cast<int>(target.size()) != rho.qubits()) {
        throw std::invalid_argument("target length mismatch");
    }
    Eigen::Index idx = 0;
    for (char c : target) idx = (idx << 1) | (c == '1' ? 1 : 0);
    return rho.data()(idx, idx).real();
}

Eigen::VectorXd diagonal_probabilities(const DensityMatrix& rho) {
    return rho.data().diagonal().real().cwiseMax(0.0);
}

}  // namespace qxs

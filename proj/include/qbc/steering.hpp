// Copyright 2026 The qbc-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Ensembles, purifications and the steering attack on perfectly concealing
// commitments.
//
// A committer whose two evidence ensembles share one density matrix can hand
// over half of a purification of the bit-0 ensemble and, at unveil time,
// measure the kept reference in whichever basis steers the evidence into the
// ensemble she wants to open.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qbc/qcore.hpp"

namespace qbc {

/// Raised when two ensembles do not describe the same density matrix, so
/// no unitary on the purifying reference links them.
class DensitiesDiffer : public std::runtime_error {
  public:
    explicit DensitiesDiffer(double gap)
        : std::runtime_error("ensemble densities differ (max entry gap " + std::to_string(gap) + ")"), gap_(gap) {}
    double gap() const { return gap_; }

  private:
    double gap_;
};

struct EnsembleMember {
    double weight;
    Register state;
};

/// Weighted pure states of one common dimension. Zero weights are allowed
/// for padding.
class Ensemble {
  public:
    explicit Ensemble(std::vector<EnsembleMember> members) : members_(std::move(members)) {
        if (members_.empty()) {
            throw std::invalid_argument("Ensemble: no members");
        }
        double total = 0;
        for (const auto &m : members_) {
            if (m.state.n_qubits() != members_.front().state.n_qubits()) {
                throw std::invalid_argument("Ensemble: members differ in dimension");
            }
            if (!(m.weight >= 0.0) || m.weight > 1.0 + kExactTol) {
                throw std::invalid_argument("Ensemble: weight outside [0, 1]");
            }
            total += m.weight;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("Ensemble: weights do not sum to 1");
        }
    }

    /// Builds an ensemble from the columns sqrt(p_j)|chi_j> of `tilde`.
    static Ensemble from_tilde(const Eigen::MatrixXcd &tilde) {
        std::vector<EnsembleMember> members;
        for (Eigen::Index c = 0; c < tilde.cols(); ++c) {
            const double w = tilde.col(c).squaredNorm();
            if (w < 1e-24) {
                Eigen::VectorXcd e = Eigen::VectorXcd::Zero(tilde.rows());
                e[0] = 1;
                members.push_back({0.0, Register::from_vector(e)});
            } else {
                members.push_back({w, Register::from_vector(tilde.col(c) / std::sqrt(w))});
            }
        }
        return Ensemble(std::move(members));
    }

    const std::vector<EnsembleMember> &members() const { return members_; }
    size_t size() const { return members_.size(); }
    int n_qubits() const { return members_.front().state.n_qubits(); }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(members_.front().state.dim()); }

    /// dim x columns matrix of sqrt(p_j)|chi_j>, zero-padded on the right.
    Eigen::MatrixXcd tilde_matrix(Eigen::Index columns = 0) const {
        const Eigen::Index cols = std::max<Eigen::Index>(columns, static_cast<Eigen::Index>(size()));
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim(), cols);
        for (size_t j = 0; j < size(); ++j) {
            a.col(static_cast<Eigen::Index>(j)) = std::sqrt(members_[j].weight) * members_[j].state.vector();
        }
        return a;
    }

  private:
    std::vector<EnsembleMember> members_;
};

inline DensityMatrix ensemble_density(const Ensemble &ens) {
    const Eigen::MatrixXcd a = ens.tilde_matrix();
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho = (rho + rho.adjoint()) * 0.5;
    return DensityMatrix::from_matrix(rho, 1e-9);
}

/// |Psi> = sum_j |j>_ref (x) sqrt(p_j)|chi_j>, reference index major.
struct Purification {
    Eigen::VectorXcd joint_state;
    Eigen::Index reference_dim = 0;
    Eigen::Index evidence_dim = 0;

    /// Columns are the reference labels |phi_j^0> (the computational basis).
    Eigen::MatrixXcd reference_basis() const { return Eigen::MatrixXcd::Identity(reference_dim, reference_dim); }

    /// Unnormalized evidence vector left by projecting the reference on |b>.
    Eigen::VectorXcd conditional_evidence(const Eigen::VectorXcd &b) const {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(evidence_dim);
        for (Eigen::Index k = 0; k < reference_dim; ++k) {
            out += std::conj(b[k]) * joint_state.segment(k * evidence_dim, evidence_dim);
        }
        return out;
    }

    DensityMatrix evidence_density() const {
        Eigen::MatrixXcd rho = trace_out_first(joint_state, reference_dim);
        rho = (rho + rho.adjoint()) * 0.5;
        return DensityMatrix::from_matrix(rho, 1e-9);
    }
};

inline Purification purify(const Ensemble &ens, Eigen::Index min_reference_dim = 0) {
    Purification p;
    p.reference_dim = std::max<Eigen::Index>(min_reference_dim, static_cast<Eigen::Index>(ens.size()));
    p.evidence_dim = ens.dim();
    const Eigen::MatrixXcd a = ens.tilde_matrix(p.reference_dim);
    p.joint_state.resize(p.reference_dim * p.evidence_dim);
    for (Eigen::Index j = 0; j < p.reference_dim; ++j) {
        p.joint_state.segment(j * p.evidence_dim, p.evidence_dim) = a.col(j);
    }
    return p;
}

struct ReferenceOutcome {
    Eigen::Index index;
    Register evidence;
};

/// Measures the reference in the orthonormal basis given by the columns of
/// `basis` and returns the label plus the collapsed evidence.
inline ReferenceOutcome measure_reference(const Purification &p, const Eigen::MatrixXcd &basis, Rng &rng) {
    if (basis.rows() != p.reference_dim || basis.cols() != p.reference_dim) {
        throw std::invalid_argument("measure_reference: basis has the wrong size");
    }
    std::vector<Eigen::VectorXcd> branches;
    std::vector<double> probs;
    for (Eigen::Index j = 0; j < p.reference_dim; ++j) {
        branches.push_back(p.conditional_evidence(basis.col(j)));
        probs.push_back(branches.back().squaredNorm());
    }
    const double u = rng.uniform();
    double acc = 0;
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < p.reference_dim; ++j) {
        acc += probs[j];
        if (probs[j] > 1e-15 && u < acc) {
            pick = j;
            break;
        }
    }
    if (pick < 0) {
        pick = static_cast<Eigen::Index>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    return {pick, Register::from_vector(branches[pick] / std::sqrt(probs[pick]))};
}

/// Makes each column's largest-magnitude entry real and positive. Ties within
/// 1e-9 go to the lowest row so the choice is stable under rounding.
inline Eigen::MatrixXcd canonical_column_phases(Eigen::MatrixXcd u) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        const double mx = u.col(c).cwiseAbs().maxCoeff();
        if (mx < 1e-12) {
            continue;
        }
        Eigen::Index r = 0;
        while (std::abs(u(r, c)) < mx - 1e-9) {
            ++r;
        }
        u.col(c) *= std::conj(u(r, c)) / std::abs(u(r, c));
    }
    return u;
}

/// Largest entrywise gap after quotienting per-column phases.
inline double column_phase_distance(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (canonical_column_phases(a) - canonical_column_phases(b)).cwiseAbs().maxCoeff();
}

struct CheatUnitary {
    Eigen::MatrixXcd matrix;

    Eigen::Index dim() const { return matrix.rows(); }

    double unitarity_error() const {
        return (matrix.adjoint() * matrix - Eigen::MatrixXcd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    }

    /// max_k || chi~0_k - sum_j U_jk chi~1_j ||.
    double residual(const Ensemble &ens0, const Ensemble &ens1) const {
        const Eigen::MatrixXcd a0 = ens0.tilde_matrix(dim());
        const Eigen::MatrixXcd a1 = ens1.tilde_matrix(dim());
        if (a0.cols() != dim() || a1.cols() != dim()) {
            return std::numeric_limits<double>::infinity();
        }
        return (a0 - a1 * matrix).colwise().norm().maxCoeff();
    }

    /// Reference basis that steers the evidence into ensemble 1: b_j = sum_k U_jk |k>.
    Eigen::MatrixXcd steering_basis() const { return matrix.transpose(); }
};

/// Solves chi~0_k = sum_j U_jk chi~1_j for a unitary U.
///
/// With A_a the tilde matrices (zero-padded to a common width) and rho their
/// shared density, A_1^dag rho^+ A_0 maps the row space of A_0 isometrically
/// onto that of A_1, and P_1 P_0 (P_a the projector onto ker A_a) carries the
/// padding directions across. The polar factor of their sum is the answer;
/// both pieces are unchanged when the two ensembles are rotated together.
inline CheatUnitary solve_cheat_unitary(const Ensemble &ens0, const Ensemble &ens1) {
    if (ens0.dim() != ens1.dim()) {
        throw std::invalid_argument("solve_cheat_unitary: ensembles act on different spaces");
    }
    const Eigen::Index k = static_cast<Eigen::Index>(std::max(ens0.size(), ens1.size()));
    const Eigen::MatrixXcd a0 = ens0.tilde_matrix(k);
    const Eigen::MatrixXcd a1 = ens1.tilde_matrix(k);
    const Eigen::MatrixXcd rho0 = a0 * a0.adjoint();
    const Eigen::MatrixXcd rho1 = a1 * a1.adjoint();
    const double gap = (rho0 - rho1).cwiseAbs().maxCoeff();
    if (gap > kSpectralTol) {
        throw DensitiesDiffer(gap);
    }
    Eigen::MatrixXcd rho = (rho0 + rho1) * 0.5;
    rho = (rho + rho.adjoint()) * 0.5;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    Eigen::VectorXd inv = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        inv[i] = inv[i] > 1e-10 ? 1.0 / inv[i] : 0.0;
    }
    const Eigen::MatrixXcd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();

    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(k, k);
    const Eigen::MatrixXcd p0 = id - a0.adjoint() * pinv * a0;
    const Eigen::MatrixXcd p1 = id - a1.adjoint() * pinv * a1;
    const Eigen::MatrixXcd m = a1.adjoint() * pinv * a0 + p1 * p0;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return CheatUnitary{svd.matrixU() * svd.matrixV().adjoint()};
}

/// Receiver of the toy perfectly concealing scheme: accepts unveil (a, j)
/// iff the evidence passes the projective test onto |chi_j^a>.
inline bool toy_receiver_accepts(const Ensemble &ens_a, Eigen::Index j, const Register &evidence, Rng &rng) {
    if (j < 0 || static_cast<size_t>(j) >= ens_a.size() || ens_a.members()[j].weight <= 0) {
        return false;
    }
    const double p_yes = overlap_sq(ens_a.members()[j].state, evidence);
    return rng.uniform() < p_yes;
}

/// Opens the commitment to `target_bit` by measuring the reference either in
/// its own labels (bit 0) or in the basis rotated by `u` (bit 1).
inline ReferenceOutcome steer_and_unveil(const Purification &purif, const CheatUnitary &u, int target_bit, Rng &rng) {
    if (purif.reference_dim > u.dim()) {
        throw std::invalid_argument("steer_and_unveil: reference larger than the cheat unitary");
    }
    Purification p = purif;
    if (p.reference_dim < u.dim()) {
        p.joint_state.conservativeResize(u.dim() * p.evidence_dim);
        p.joint_state.tail((u.dim() - purif.reference_dim) * p.evidence_dim).setZero();
        p.reference_dim = u.dim();
    }
    const Eigen::MatrixXcd basis = target_bit == 0 ? p.reference_basis() : u.steering_basis();
    return measure_reference(p, basis, rng);
}

inline bool is_unitary(const Eigen::MatrixXcd &v, double tol = kSpectralTol) {
    return v.rows() == v.cols() &&
           (v.adjoint() * v - Eigen::MatrixXcd::Identity(v.rows(), v.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline Ensemble rotate_ensemble(const Ensemble &ens, const Eigen::MatrixXcd &v) {
    if (v.rows() != ens.dim() || !is_unitary(v)) {
        throw std::invalid_argument("rotate_ensemble: rotation must be a unitary on the member space");
    }
    std::vector<EnsembleMember> out;
    out.reserve(ens.size());
    for (const auto &m : ens.members()) {
        out.push_back({m.weight, Register::from_vector(v * m.state.vector())});
    }
    return Ensemble(std::move(out));
}

/// Haar-random unitary (QR of a complex Ginibre matrix with phase fix).
inline Eigen::MatrixXcd random_unitary(Eigen::Index dim, Rng &rng) {
    Eigen::MatrixXcd g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            g(r, c) = cplx(rng.normal(), rng.normal());
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < dim; ++c) {
        const cplx d = r(c, c);
        q.col(c) *= d / std::abs(d);
    }
    return q;
}

/// Random ensemble of `size` Haar-random pure states on `n_qubits` qubits.
inline Ensemble random_ensemble(size_t size, int n_qubits, Rng &rng) {
    const Eigen::Index d = Eigen::Index{1} << n_qubits;
    std::vector<double> w(size);
    double total = 0;
    for (auto &x : w) {
        x = 0.05 + rng.uniform();
        total += x;
    }
    std::vector<EnsembleMember> members;
    for (size_t j = 0; j < size; ++j) {
        members.push_back({w[j] / total, Register::from_vector(random_unitary(d, rng).col(0))});
    }
    return Ensemble(std::move(members));
}

/// Ensemble with the same density as `ens`, obtained by mixing its tilde
/// vectors through a random unitary: A_1 = A_0 V.
inline Ensemble remix_ensemble(const Ensemble &ens, Rng &rng) {
    const Eigen::MatrixXcd v = random_unitary(static_cast<Eigen::Index>(ens.size()), rng);
    return Ensemble::from_tilde(ens.tilde_matrix() * v);
}

}  // namespace qbc

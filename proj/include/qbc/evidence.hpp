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

// Exact density of a decoy-padded evidence string as seen by the receiver.
//
// The receiver does not know where the n commit qubits sit among the N = n+Q
// evidence qubits, and every decoy looks like I/2 to him. Averaging over the
// uniformly random placement gives
//
//     rho = (N-n)!/N! * sum_f  (x)_q O_q^f,   O_q^f = |phi_j><phi_j| if f(j) = q, else I/2
//
// over injective maps f from commit indices to positions. rho commutes with
// every qubit permutation, so it is block diagonal in the total-spin
// decomposition: rho = (+)_J A_J (x) 1_{m_J}. Fidelities are computed per
// block, which keeps N = 12 at a few hundred small matrix products.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qbc/qcore.hpp"

namespace qbc {

/// Largest evidence size for which a dense 2^N x 2^N matrix is built.
inline constexpr int kDenseEvidenceLimit = 10;

inline uint64_t binomial_u64(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
    }
    return r;
}

/// One spin-J block: `matrix` acts on the (2J+1)-dimensional irrep and is
/// repeated `multiplicity` times. `two_j` stores 2J to stay integral.
struct SpinBlock {
    int two_j;
    uint64_t multiplicity;
    Eigen::MatrixXcd matrix;
};

class SymmetricEvidence {
  public:
    SymmetricEvidence(std::vector<Register> commit_states, int total_qubits)
        : commit_(std::move(commit_states)), n_total_(total_qubits) {
        if (total_qubits < 1 || total_qubits > 20) {
            throw std::invalid_argument("SymmetricEvidence: total qubits must be in [1, 20]");
        }
        if (static_cast<int>(commit_.size()) > total_qubits || commit_.size() > 8) {
            throw std::invalid_argument("SymmetricEvidence: too many commit states");
        }
        for (const auto &s : commit_) {
            if (s.n_qubits() != 1) {
                throw std::invalid_argument("SymmetricEvidence: commit states must be single qubits");
            }
            const Eigen::Vector2cd v(s[0], s[1]);
            Eigen::Matrix2cd p = v * v.adjoint();
            projectors_.push_back({p(0, 0), p(0, 1), p(1, 0), p(1, 1)});
        }
        // (N-n)!/N!
        norm_ = 1.0;
        for (int i = 0; i < n_commit(); ++i) {
            norm_ /= static_cast<double>(n_total_ - i);
        }
    }

    int n_total() const { return n_total_; }
    int n_commit() const { return static_cast<int>(commit_.size()); }
    Eigen::Index dim() const { return Eigen::Index{1} << n_total_; }

    /// rho * v without forming rho.
    Eigen::VectorXcd apply(const Eigen::VectorXcd &v) const {
        if (v.size() != dim()) {
            throw std::invalid_argument("SymmetricEvidence::apply: dimension mismatch");
        }
        const size_t masks = size_t{1} << n_commit();
        // w[mask]: partial product over processed qubits with the commit
        // states in `mask` already placed.
        std::vector<Eigen::VectorXcd> w(masks, Eigen::VectorXcd::Zero(dim()));
        w[0] = v;
        const Mat2 half = {0.5, 0, 0, 0.5};
        for (int q = 0; q < n_total_; ++q) {
            std::vector<Eigen::VectorXcd> next(masks, Eigen::VectorXcd::Zero(dim()));
            for (size_t mask = 0; mask < masks; ++mask) {
                if (w[mask].isZero(0.0)) {
                    continue;
                }
                Eigen::VectorXcd t = w[mask];
                detail::apply_mat2(std::span<cplx>(t.data(), static_cast<size_t>(t.size())), n_total_, q, half);
                next[mask] += t;
                for (int j = 0; j < n_commit(); ++j) {
                    if (mask & (size_t{1} << j)) {
                        continue;
                    }
                    Eigen::VectorXcd u = w[mask];
                    detail::apply_mat2(std::span<cplx>(u.data(), static_cast<size_t>(u.size())), n_total_, q,
                                       projectors_[j]);
                    next[mask | (size_t{1} << j)] += u;
                }
            }
            w = std::move(next);
        }
        return norm_ * w[masks - 1];
    }

    DensityMatrix dense() const {
        if (n_total_ > kDenseEvidenceLimit) {
            throw std::invalid_argument("SymmetricEvidence::dense: too many qubits for a dense matrix");
        }
        Eigen::MatrixXcd rho(dim(), dim());
        for (Eigen::Index c = 0; c < dim(); ++c) {
            rho.col(c) = apply(Eigen::VectorXcd::Unit(dim(), c));
        }
        rho = (rho + rho.adjoint()) * 0.5;
        return DensityMatrix::from_matrix(rho, 1e-9);
    }

    std::vector<SpinBlock> blocks() const {
        std::vector<SpinBlock> out;
        for (int two_j = n_total_; two_j >= 0; two_j -= 2) {
            const int size = two_j + 1;
            std::vector<Eigen::VectorXcd> basis;
            std::vector<Eigen::VectorXcd> images;
            for (int k = 0; k < size; ++k) {
                basis.push_back(spin_vector(two_j, k));
                images.push_back(apply(basis.back()));
            }
            Eigen::MatrixXcd a(size, size);
            for (int r = 0; r < size; ++r) {
                for (int c = 0; c < size; ++c) {
                    a(r, c) = basis[r].dot(images[c]);
                }
            }
            out.push_back({two_j, spin_multiplicity(n_total_, two_j), (a + a.adjoint()) * 0.5});
        }
        return out;
    }

    /// Number of independent copies of the spin-J irrep among N qubits.
    static uint64_t spin_multiplicity(int n_total, int two_j) {
        const int k = (n_total - two_j) / 2;
        return binomial_u64(n_total, k) - binomial_u64(n_total, k - 1);
    }

    /// |J, k> of one representative irrep copy: a Dicke state with k ones on
    /// the first 2J qubits, then singlets on consecutive remaining pairs.
    Eigen::VectorXcd spin_vector(int two_j, int k) const {
        const int pairs = (n_total_ - two_j) / 2;
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim());
        const double dicke = 1.0 / std::sqrt(static_cast<double>(binomial_u64(two_j, k)));
        const double singlet = std::pow(kInvSqrt2, pairs);
        for (uint64_t head = 0; head < (uint64_t{1} << two_j); ++head) {
            if (std::popcount(head) != k) {
                continue;
            }
            for (uint64_t choice = 0; choice < (uint64_t{1} << pairs); ++choice) {
                // Pair p contributes |01> (+) or -|10>.
                uint64_t idx = head;
                double sign = 1.0;
                for (int p = 0; p < pairs; ++p) {
                    const bool flipped = (choice >> p) & 1;
                    idx = (idx << 2) | (flipped ? 2u : 1u);
                    if (flipped) {
                        sign = -sign;
                    }
                }
                v[static_cast<Eigen::Index>(idx)] = sign * dicke * singlet;
            }
        }
        return v;
    }

  private:
    std::vector<Register> commit_;
    std::vector<Mat2> projectors_;
    int n_total_;
    double norm_ = 1.0;
};

/// Blocks of (I/2)^{(x) N}.
inline std::vector<SpinBlock> maximally_mixed_blocks(int n_total) {
    std::vector<SpinBlock> out;
    const double w = std::ldexp(1.0, -n_total);
    for (int two_j = n_total; two_j >= 0; two_j -= 2) {
        out.push_back({two_j, SymmetricEvidence::spin_multiplicity(n_total, two_j),
                       Eigen::MatrixXcd::Identity(two_j + 1, two_j + 1) * w});
    }
    return out;
}

/// Fidelity of two permutation-invariant states given block-wise.
inline double block_fidelity(const std::vector<SpinBlock> &rho, const std::vector<SpinBlock> &sigma) {
    if (rho.size() != sigma.size()) {
        throw std::invalid_argument("block_fidelity: block structures differ");
    }
    double f = 0;
    for (size_t i = 0; i < rho.size(); ++i) {
        if (rho[i].two_j != sigma[i].two_j) {
            throw std::invalid_argument("block_fidelity: block structures differ");
        }
        f += static_cast<double>(rho[i].multiplicity) * fidelity_psd(rho[i].matrix, sigma[i].matrix);
    }
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace qbc

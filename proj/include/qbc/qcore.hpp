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

// Exact simulation of one- and two-qubit states.
//
// Conventions: qubit 0 is the leftmost tensor factor, so in a two-qubit
// register amplitude index = 2*b0 + b1. Global phase is never tracked.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbc/rng.hpp"

namespace qbc {

using cplx = std::complex<double>;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kExactTol = 1e-12;
inline constexpr double kSpectralTol = 1e-9;

enum class Basis : uint8_t { Z, X };

inline const char *to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

/// One of the four BB84 states: |0>,|1> (Z) or |+>,|-> (X).
struct Bb84State {
    Basis basis = Basis::Z;
    int bit = 0;

    friend bool operator==(const Bb84State &, const Bb84State &) = default;

    std::string name() const {
        if (basis == Basis::Z) {
            return bit ? "1" : "0";
        }
        return bit ? "-" : "+";
    }

    static Bb84State random(Rng &rng) {
        const uint64_t r = rng.below(4);
        return {r < 2 ? Basis::Z : Basis::X, static_cast<int>(r & 1)};
    }

    static std::array<Bb84State, 4> all() {
        return {Bb84State{Basis::Z, 0}, Bb84State{Basis::Z, 1}, Bb84State{Basis::X, 0}, Bb84State{Basis::X, 1}};
    }
};

enum class Gate : uint8_t { I, X, Y, Z, H };

using Mat2 = std::array<cplx, 4>;  // row-major

inline Mat2 gate_matrix(Gate g) {
    switch (g) {
        case Gate::I:
            return {1, 0, 0, 1};
        case Gate::X:
            return {0, 1, 1, 0};
        case Gate::Y:
            return {0, cplx(0, -1), cplx(0, 1), 0};
        case Gate::Z:
            return {1, 0, 0, -1};
        case Gate::H:
            return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
    }
    throw std::invalid_argument("gate_matrix: unknown gate");
}

namespace detail {

inline size_t qubit_mask(int n_qubits, int target) { return size_t{1} << (n_qubits - 1 - target); }

inline void apply_mat2(std::span<cplx> amps, int n_qubits, int target, const Mat2 &m) {
    const size_t mask = qubit_mask(n_qubits, target);
    for (size_t i = 0; i < amps.size(); ++i) {
        if (i & mask) {
            continue;
        }
        const cplx a0 = amps[i];
        const cplx a1 = amps[i | mask];
        amps[i] = m[0] * a0 + m[1] * a1;
        amps[i | mask] = m[2] * a0 + m[3] * a1;
    }
}

inline double norm_sq(std::span<const cplx> amps) {
    double s = 0;
    for (const cplx &a : amps) {
        s += std::norm(a);
    }
    return s;
}

/// Probability of Z-outcome 0 on `target`.
inline double prob_zero(std::span<const cplx> amps, int n_qubits, int target) {
    const size_t mask = qubit_mask(n_qubits, target);
    double p = 0;
    for (size_t i = 0; i < amps.size(); ++i) {
        if (!(i & mask)) {
            p += std::norm(amps[i]);
        }
    }
    return p;
}

/// Projects `target` onto Z-outcome `outcome` and renormalizes.
inline void collapse(std::span<cplx> amps, int n_qubits, int target, int outcome, double prob) {
    const size_t mask = qubit_mask(n_qubits, target);
    const double scale = 1.0 / std::sqrt(prob);
    for (size_t i = 0; i < amps.size(); ++i) {
        const bool one = (i & mask) != 0;
        amps[i] = (one == (outcome == 1)) ? amps[i] * scale : cplx(0);
    }
}

/// Born-samples a measurement of `target` in `basis`; returns the outcome
/// and leaves `amps` in the post-measurement state.
inline int measure_in_place(std::span<cplx> amps, int n_qubits, int target, Basis basis, Rng &rng) {
    const Mat2 h = gate_matrix(Gate::H);
    if (basis == Basis::X) {
        apply_mat2(amps, n_qubits, target, h);
    }
    const double p0 = std::clamp(prob_zero(amps, n_qubits, target), 0.0, 1.0);
    const int outcome = rng.uniform() < p0 ? 0 : 1;
    collapse(amps, n_qubits, target, outcome, outcome == 0 ? p0 : 1.0 - p0);
    if (basis == Basis::X) {
        apply_mat2(amps, n_qubits, target, h);
    }
    return outcome;
}

}  // namespace detail

/// Exact amplitude vector over one or two qubits.
class Register {
  public:
    Register() : Register(1, {cplx(1), 0, 0, 0}) {}

    Register(int n_qubits, std::array<cplx, 4> amplitudes) : n_(n_qubits), amps_(amplitudes) {
        if (n_ != 1 && n_ != 2) {
            throw std::invalid_argument("Register: n_qubits must be 1 or 2");
        }
        for (size_t i = dim(); i < 4; ++i) {
            if (amps_[i] != cplx(0)) {
                throw std::invalid_argument("Register: amplitude beyond dimension");
            }
        }
        const double nrm = detail::norm_sq(amplitudes_span());
        if (std::abs(nrm - 1.0) > 1e-9) {
            throw std::invalid_argument("Register: amplitudes not normalized");
        }
    }

    static Register from_vector(const Eigen::VectorXcd &v) {
        std::array<cplx, 4> a{};
        const int n = v.size() == 2 ? 1 : v.size() == 4 ? 2 : 0;
        if (n == 0) {
            throw std::invalid_argument("Register::from_vector: dimension must be 2 or 4");
        }
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            a[i] = v[i];
        }
        return Register(n, a);
    }

    int n_qubits() const { return n_; }
    size_t dim() const { return size_t{1} << n_; }
    cplx operator[](size_t i) const { return amps_.at(i); }
    double norm_sq() const { return detail::norm_sq(amplitudes_span()); }

    std::span<const cplx> amplitudes() const { return {amps_.data(), dim()}; }
    std::span<cplx> amplitudes_mut() { return {amps_.data(), dim()}; }

    Eigen::VectorXcd vector() const {
        Eigen::VectorXcd v(dim());
        for (size_t i = 0; i < dim(); ++i) {
            v[i] = amps_[i];
        }
        return v;
    }

  private:
    std::span<const cplx> amplitudes_span() const { return {amps_.data(), dim()}; }

    int n_;
    std::array<cplx, 4> amps_;
};

/// |<a|b>|^2 for registers of equal size.
inline double overlap_sq(const Register &a, const Register &b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw std::invalid_argument("overlap_sq: size mismatch");
    }
    cplx s = 0;
    for (size_t i = 0; i < a.dim(); ++i) {
        s += std::conj(a[i]) * b[i];
    }
    return std::norm(s);
}

/// True when the two registers agree up to a global phase.
inline bool same_ray(const Register &a, const Register &b, double tol = kExactTol) {
    return a.n_qubits() == b.n_qubits() && std::abs(overlap_sq(a, b) - 1.0) <= tol;
}

inline Register prepare_bb84(Basis basis, int bit) {
    if (bit != 0 && bit != 1) {
        throw std::invalid_argument("prepare_bb84: bit must be 0 or 1");
    }
    if (basis == Basis::Z) {
        return bit == 0 ? Register(1, {cplx(1), 0, 0, 0}) : Register(1, {0, cplx(1), 0, 0});
    }
    const double s = bit == 0 ? kInvSqrt2 : -kInvSqrt2;
    return Register(1, {kInvSqrt2, s, 0, 0});
}

inline Register prepare_bb84(Bb84State s) { return prepare_bb84(s.basis, s.bit); }

inline Register apply_1q(Register reg, Gate gate, int target) {
    if (target < 0 || target >= reg.n_qubits()) {
        throw std::out_of_range("apply_1q: target out of range");
    }
    detail::apply_mat2(reg.amplitudes_mut(), reg.n_qubits(), target, gate_matrix(gate));
    return reg;
}

/// Per-qubit pad bits: the operator applied is X^x Z^z.
struct PauliBits {
    bool x = false;
    bool z = false;

    friend bool operator==(const PauliBits &, const PauliBits &) = default;

    static std::array<PauliBits, 4> all() { return {PauliBits{0, 0}, PauliBits{1, 0}, PauliBits{1, 1}, PauliBits{0, 1}}; }
};

/// Classical quantum one-time-pad key, two bits per qubit.
struct PauliKey {
    std::vector<PauliBits> bits;

    size_t size() const { return bits.size(); }

    static PauliKey random(size_t length, Rng &rng) {
        PauliKey k;
        k.bits.reserve(length);
        for (size_t i = 0; i < length; ++i) {
            const uint64_t r = rng.below(4);
            k.bits.push_back({(r & 1) != 0, (r & 2) != 0});
        }
        return k;
    }

    static PauliKey zero(size_t length) { return PauliKey{std::vector<PauliBits>(length)}; }
};

inline void apply_pauli_bits(std::span<cplx> amps, int n_qubits, int target, PauliBits p) {
    if (p.z) {
        detail::apply_mat2(amps, n_qubits, target, gate_matrix(Gate::Z));
    }
    if (p.x) {
        detail::apply_mat2(amps, n_qubits, target, gate_matrix(Gate::X));
    }
}

/// Applies X^x Z^z to each qubit. Applying the same key again undoes it up to phase.
inline Register pauli_encrypt(Register reg, const PauliKey &key) {
    if (key.size() != static_cast<size_t>(reg.n_qubits())) {
        throw std::invalid_argument("pauli_encrypt: key length does not match register");
    }
    for (int q = 0; q < reg.n_qubits(); ++q) {
        apply_pauli_bits(reg.amplitudes_mut(), reg.n_qubits(), q, key.bits[q]);
    }
    return reg;
}

struct MeasureResult {
    int outcome;
    Register post_state;
};

inline MeasureResult measure(Register reg, Basis basis, int target, Rng &rng) {
    if (target < 0 || target >= reg.n_qubits()) {
        throw std::out_of_range("measure: target out of range");
    }
    const int outcome = detail::measure_in_place(reg.amplitudes_mut(), reg.n_qubits(), target, basis, rng);
    return {outcome, reg};
}

enum class BellIndex : uint8_t { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline const char *to_string(BellIndex b) {
    switch (b) {
        case BellIndex::PhiPlus:
            return "Phi+";
        case BellIndex::PhiMinus:
            return "Phi-";
        case BellIndex::PsiPlus:
            return "Psi+";
        case BellIndex::PsiMinus:
            return "Psi-";
    }
    return "?";
}

inline constexpr std::array<BellIndex, 4> kBellIndices = {BellIndex::PhiPlus, BellIndex::PhiMinus, BellIndex::PsiPlus,
                                                          BellIndex::PsiMinus};

inline std::array<cplx, 4> bell_amplitudes(BellIndex b) {
    switch (b) {
        case BellIndex::PhiPlus:
            return {kInvSqrt2, 0, 0, kInvSqrt2};
        case BellIndex::PhiMinus:
            return {kInvSqrt2, 0, 0, -kInvSqrt2};
        case BellIndex::PsiPlus:
            return {0, kInvSqrt2, kInvSqrt2, 0};
        case BellIndex::PsiMinus:
            return {0, kInvSqrt2, -kInvSqrt2, 0};
    }
    throw std::invalid_argument("bell_amplitudes: unknown index");
}

inline Register bell_state(BellIndex b) { return Register(2, bell_amplitudes(b)); }

inline Register bell_pair() { return bell_state(BellIndex::PhiPlus); }

struct BellResult {
    BellIndex index;
    Register post_state;
};

inline BellResult bell_measure(const Register &reg, Rng &rng) {
    if (reg.n_qubits() != 2) {
        throw std::invalid_argument("bell_measure: needs a two-qubit register");
    }
    std::array<double, 4> probs{};
    for (size_t k = 0; k < 4; ++k) {
        const auto b = bell_amplitudes(kBellIndices[k]);
        cplx s = 0;
        for (size_t i = 0; i < 4; ++i) {
            s += std::conj(b[i]) * reg[i];
        }
        probs[k] = std::norm(s);
    }
    const double u = rng.uniform();
    double acc = 0;
    size_t pick = 4;
    for (size_t k = 0; k < 4; ++k) {
        acc += probs[k];
        if (probs[k] > 0 && u < acc) {
            pick = k;
            break;
        }
    }
    if (pick == 4) {
        // u landed in the rounding slack above the cumulative total
        for (size_t k = 0; k < 4; ++k) {
            if (probs[k] > 0) {
                pick = k;
            }
        }
    }
    return {kBellIndices[pick], bell_state(kBellIndices[pick])};
}

/// Validated density matrix (Hermitian, unit trace).
class DensityMatrix {
  public:
    static DensityMatrix from_matrix(Eigen::MatrixXcd m, double tol = kExactTol) {
        if (m.rows() != m.cols() || m.rows() == 0 || (m.rows() & (m.rows() - 1)) != 0) {
            throw std::invalid_argument("DensityMatrix: dimension must be a power of two");
        }
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) {
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        }
        if (std::abs(m.trace() - cplx(1)) > tol * static_cast<double>(m.rows())) {
            throw std::invalid_argument("DensityMatrix: trace is not 1");
        }
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix pure(const Eigen::VectorXcd &v) { return from_matrix(v * v.adjoint()); }
    static DensityMatrix pure(const Register &r) { return pure(r.vector()); }

    static DensityMatrix maximally_mixed(Eigen::Index dim) {
        return from_matrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
    }

    Eigen::Index dim() const { return m_.rows(); }
    const Eigen::MatrixXcd &entries() const { return m_; }
    cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

  private:
    explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}
    Eigen::MatrixXcd m_;
};

inline Eigen::Matrix2cd pauli_eigen(Gate g) {
    const Mat2 m = gate_matrix(g);
    Eigen::Matrix2cd e;
    e << m[0], m[1], m[2], m[3];
    return e;
}

/// Uniform average of (P rho P^dagger) over all 4^n Pauli keys, computed exactly.
inline DensityMatrix pauli_key_average(const DensityMatrix &rho) {
    const Eigen::Index dim = rho.dim();
    const int n = static_cast<int>(std::log2(static_cast<double>(dim)) + 0.5);
    const std::array<Gate, 4> paulis = {Gate::I, Gate::X, Gate::Y, Gate::Z};
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    const size_t keys = size_t{1} << (2 * n);
    for (size_t key = 0; key < keys; ++key) {
        Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
        for (int q = 0; q < n; ++q) {
            const Eigen::Matrix2cd p = pauli_eigen(paulis[(key >> (2 * q)) & 3]);
            Eigen::MatrixXcd next(op.rows() * 2, op.cols() * 2);
            for (Eigen::Index r = 0; r < op.rows(); ++r) {
                for (Eigen::Index c = 0; c < op.cols(); ++c) {
                    next.block(2 * r, 2 * c, 2, 2) = op(r, c) * p;
                }
            }
            op = next;
        }
        acc += op * rho.entries() * op.adjoint();
    }
    return DensityMatrix::from_matrix(acc / static_cast<double>(keys));
}

namespace detail {

inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd &m, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.size() > 0 && ev.minCoeff() < -tol) {
        throw std::invalid_argument("fidelity: input is not positive semidefinite");
    }
    // Eigenvalues at rounding level are zeros; their square roots (~1e-8)
    // would otherwise leak into the fidelity at first order.
    const double floor = 1e-14 * std::max(1.0, ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        ev[i] = ev[i] > floor ? std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Tr sqrt(sqrt(sigma) rho sqrt(sigma)) for positive semidefinite operators of
/// any trace. Used directly on the block-diagonal pieces of symmetric states.
inline double fidelity_psd(const Eigen::MatrixXcd &rho, const Eigen::MatrixXcd &sigma, double tol = kSpectralTol) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> check(rho, Eigen::EigenvaluesOnly);
    if (check.eigenvalues().size() > 0 && check.eigenvalues().minCoeff() < -tol) {
        throw std::invalid_argument("fidelity: input is not positive semidefinite");
    }
    const Eigen::MatrixXcd rs = detail::psd_sqrt(sigma, tol);
    Eigen::MatrixXcd inner = rs * rho * rs;
    inner = (inner + inner.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
    double f = 0;
    const double floor = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()[i] > floor) {
            f += std::sqrt(es.eigenvalues()[i]);
        }
    }
    return f;
}

inline double fidelity(const DensityMatrix &rho, const DensityMatrix &sigma) {
    if (rho.dim() != sigma.dim()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    return std::clamp(fidelity_psd(rho.entries(), sigma.entries()), 0.0, 1.0);
}

/// Traces out the first (left) factor of dimension `dim_a` from a pure joint
/// vector over A (x) B, A-index major.
inline Eigen::MatrixXcd trace_out_first(const Eigen::VectorXcd &joint, Eigen::Index dim_a) {
    const Eigen::Index dim_b = joint.size() / dim_a;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_b, dim_b);
    for (Eigen::Index a = 0; a < dim_a; ++a) {
        const Eigen::VectorXcd slice = joint.segment(a * dim_b, dim_b);
        out += slice * slice.adjoint();
    }
    return out;
}

}  // namespace qbc

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

#include "qbc/qcore.hpp"
#include "qbc/qubit_pool.hpp"

#include "gtest/gtest.h"
#include "stats_util.hpp"

using namespace qbc;

namespace {

constexpr double kTol = 1e-12;

void expect_amps(const Register &r, std::initializer_list<cplx> expected) {
    ASSERT_EQ(r.dim(), expected.size());
    size_t i = 0;
    for (const cplx &e : expected) {
        EXPECT_NEAR(std::abs(r[i] - e), 0.0, kTol) << "amplitude " << i;
        ++i;
    }
}

Register random_state(int n, Rng &rng) {
    std::array<cplx, 4> a{};
    double s = 0;
    for (size_t i = 0; i < (size_t{1} << n); ++i) {
        a[i] = cplx(rng.normal(), rng.normal());
        s += std::norm(a[i]);
    }
    for (auto &x : a) {
        x /= std::sqrt(s);
    }
    return Register(n, a);
}

}  // namespace

TEST(qcore, prepare_bb84) {
    expect_amps(prepare_bb84(Basis::Z, 0), {1, 0});
    expect_amps(prepare_bb84(Basis::Z, 1), {0, 1});
    expect_amps(prepare_bb84(Basis::X, 0), {kInvSqrt2, kInvSqrt2});
    expect_amps(prepare_bb84(Basis::X, 1), {kInvSqrt2, -kInvSqrt2});
    EXPECT_THROW(prepare_bb84(Basis::Z, 2), std::invalid_argument);
}

TEST(qcore, apply_1q) {
    expect_amps(apply_1q(prepare_bb84(Basis::Z, 0), Gate::H, 0), {kInvSqrt2, kInvSqrt2});
    expect_amps(apply_1q(prepare_bb84(Basis::X, 0), Gate::X, 0), {kInvSqrt2, kInvSqrt2});
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Register r = random_state(1 + trial % 2, rng);
        const int target = trial % r.n_qubits();
        const Register back = apply_1q(apply_1q(r, Gate::Z, target), Gate::Z, target);
        for (size_t i = 0; i < r.dim(); ++i) {
            EXPECT_NEAR(std::abs(back[i] - r[i]), 0.0, kTol);
        }
    }
    EXPECT_THROW(apply_1q(prepare_bb84(Basis::Z, 0), Gate::X, 1), std::out_of_range);
}

TEST(qcore, two_qubit_ordering_is_big_endian) {
    // X on qubit 0 of |00> gives |10>, amplitude index 2.
    const Register r = apply_1q(Register(2, {cplx(1), 0, 0, 0}), Gate::X, 0);
    expect_amps(r, {0, 0, 1, 0});
}

TEST(qcore, pauli_encrypt) {
    Rng rng(11);
    const Register r = random_state(2, rng);
    const Register same = pauli_encrypt(r, PauliKey::zero(2));
    EXPECT_TRUE(same_ray(same, r));
    expect_amps(pauli_encrypt(prepare_bb84(Basis::Z, 0), PauliKey{{{true, false}}}), {0, 1});
    EXPECT_THROW(pauli_encrypt(r, PauliKey::zero(1)), std::invalid_argument);

    for (int trial = 0; trial < 100; ++trial) {
        const Register s = random_state(1 + trial % 2, rng);
        const PauliKey key = PauliKey::random(static_cast<size_t>(s.n_qubits()), rng);
        EXPECT_TRUE(same_ray(pauli_encrypt(pauli_encrypt(s, key), key), s));
    }
}

TEST(qcore, one_time_pad_mixes_every_pure_state) {
    const DensityMatrix avg0 = pauli_key_average(DensityMatrix::pure(prepare_bb84(Basis::Z, 0)));
    EXPECT_NEAR((avg0.entries() - Eigen::MatrixXcd::Identity(2, 2) * 0.5).cwiseAbs().maxCoeff(), 0.0, kTol);

    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Register s = random_state(1 + trial % 2, rng);
        const DensityMatrix avg = pauli_key_average(DensityMatrix::pure(s));
        const auto d = static_cast<double>(s.dim());
        EXPECT_NEAR((avg.entries() - Eigen::MatrixXcd::Identity(s.dim(), s.dim()) / d).cwiseAbs().maxCoeff(), 0.0,
                    kTol);
    }
}

TEST(qcore, norm_preserved_under_gate_sequences) {
    Rng rng(5);
    const std::array<Gate, 5> gates = {Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H};
    for (int trial = 0; trial < 100; ++trial) {
        Register r = random_state(2, rng);
        for (int step = 0; step < 40; ++step) {
            if (rng.bit()) {
                r = apply_1q(r, gates[rng.below(5)], static_cast<int>(rng.below(2)));
            } else {
                r = pauli_encrypt(r, PauliKey::random(2, rng));
            }
            ASSERT_NEAR(r.norm_sq(), 1.0, kTol);
        }
    }
}

TEST(qcore, measure_eigenstates_are_deterministic) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(measure(prepare_bb84(Basis::Z, 0), Basis::Z, 0, rng).outcome, 0);
        EXPECT_EQ(measure(prepare_bb84(Basis::X, 1), Basis::X, 0, rng).outcome, 1);
    }
}

TEST(qcore, measure_plus_in_z_is_fair) {
    Rng rng(2);
    const int trials = 10000;
    int ones = 0;
    for (int i = 0; i < trials; ++i) {
        ones += measure(prepare_bb84(Basis::X, 0), Basis::Z, 0, rng).outcome;
    }
    EXPECT_TRUE(qbc_test::within_sigma(ones / double(trials), 0.5, trials));
}

TEST(qcore, measurement_is_repeatable) {
    Rng rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const Register s = random_state(2, rng);
        const Basis b = rng.bit() ? Basis::X : Basis::Z;
        const int target = static_cast<int>(rng.below(2));
        const MeasureResult first = measure(s, b, target, rng);
        const MeasureResult second = measure(first.post_state, b, target, rng);
        EXPECT_EQ(first.outcome, second.outcome);
    }
}

TEST(qcore, same_seed_same_outcomes) {
    Rng a(42), b(42);
    const Register plus = prepare_bb84(Basis::X, 0);
    for (int i = 0; i < 256; ++i) {
        EXPECT_EQ(measure(plus, Basis::Z, 0, a).outcome, measure(plus, Basis::Z, 0, b).outcome);
    }
}

TEST(qcore, bell_pair_correlations) {
    expect_amps(bell_pair(), {kInvSqrt2, 0, 0, kInvSqrt2});
    Rng rng(4);
    // Exact branch check: every Z-Z and X-X branch of |Phi+> agrees.
    for (Basis b : {Basis::Z, Basis::X}) {
        for (int i = 0; i < 500; ++i) {
            const MeasureResult first = measure(bell_pair(), b, 0, rng);
            const MeasureResult second = measure(first.post_state, b, 1, rng);
            EXPECT_EQ(first.outcome, second.outcome);
        }
    }
}

TEST(qcore, bell_measure) {
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        EXPECT_EQ(bell_measure(bell_pair(), rng).index, BellIndex::PhiPlus);
        EXPECT_EQ(bell_measure(apply_1q(bell_pair(), Gate::Z, 1), rng).index, BellIndex::PhiMinus);
    }
    const int trials = 10000;
    int psi_plus = 0;
    const Register ket01(2, {0, cplx(1), 0, 0});
    for (int i = 0; i < trials; ++i) {
        const BellIndex idx = bell_measure(ket01, rng).index;
        ASSERT_TRUE(idx == BellIndex::PsiPlus || idx == BellIndex::PsiMinus);
        psi_plus += idx == BellIndex::PsiPlus;
    }
    EXPECT_TRUE(qbc_test::within_sigma(psi_plus / double(trials), 0.5, trials));
    EXPECT_THROW(bell_measure(prepare_bb84(Basis::Z, 0), rng), std::invalid_argument);
}

TEST(qcore, fidelity_examples) {
    const DensityMatrix zero = DensityMatrix::pure(prepare_bb84(Basis::Z, 0));
    const DensityMatrix one = DensityMatrix::pure(prepare_bb84(Basis::Z, 1));
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
    EXPECT_NEAR(fidelity(zero, zero), 1.0, 1e-9);
    EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-9);
    // Pure vs maximally mixed: sqrt(<0|(I/2)|0>) = 1/sqrt(2).
    EXPECT_NEAR(fidelity(zero, mixed), kInvSqrt2, 1e-9);
    EXPECT_THROW(fidelity(zero, DensityMatrix::maximally_mixed(4)), std::invalid_argument);
}

TEST(qcore, fidelity_symmetric_and_bounded) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        // Random mixed states as mixtures of random pure states.
        auto random_mixed = [&] {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
            double total = 0;
            for (int k = 0; k < 3; ++k) {
                const double w = rng.uniform() + 0.01;
                const Eigen::VectorXcd v = random_state(2, rng).vector();
                m += w * v * v.adjoint();
                total += w;
            }
            return DensityMatrix::from_matrix(m / total, 1e-9);
        };
        const DensityMatrix a = random_mixed();
        const DensityMatrix b = random_mixed();
        const double fab = fidelity(a, b);
        EXPECT_NEAR(fab, fidelity(b, a), 1e-9);
        EXPECT_GE(fab, 0.0);
        EXPECT_LE(fab, 1.0);
        EXPECT_NEAR(fidelity(a, a), 1.0, 1e-9);
    }
}

TEST(qcore, density_matrix_validation) {
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
    EXPECT_THROW(DensityMatrix::from_matrix(bad), std::invalid_argument);  // trace 2
    Eigen::MatrixXcd nonherm(2, 2);
    nonherm << 0.5, 0.3, 0.0, 0.5;
    EXPECT_THROW(DensityMatrix::from_matrix(nonherm), std::invalid_argument);
    Eigen::MatrixXcd negative(2, 2);
    negative << 1.5, 0.0, 0.0, -0.5;
    const DensityMatrix neg = DensityMatrix::from_matrix(negative);
    EXPECT_THROW(fidelity(neg, DensityMatrix::maximally_mixed(2)), std::invalid_argument);
}

TEST(qubit_pool, bell_measurement_across_registers_swaps_entanglement) {
    // Two |Phi+> pairs (a1,b1), (a2,b2); Bell-measuring (a1, b2) leaves
    // (a2, b1) in the Bell state matching the outcome (Phi+ and Phi- swap to
    // themselves up to Pauli corrections that keep them maximally entangled).
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        QubitPool pool;
        const auto [a1, b1] = pool.add_pair(bell_pair());
        const auto [a2, b2] = pool.add_pair(bell_pair());
        const BellIndex outcome = pool.bell_measure(a1, b2, rng);
        const Register left = pool.pair_state(a2, b1);
        // The swapped pair is maximally entangled: reduced state of either half is I/2.
        Eigen::VectorXcd v = left.vector();
        const Eigen::MatrixXcd reduced = trace_out_first(v, 2);
        EXPECT_NEAR((reduced - Eigen::MatrixXcd::Identity(2, 2) * 0.5).cwiseAbs().maxCoeff(), 0.0, 1e-12);
        // And it is exactly the Bell state of the outcome, since Phi+ (x) Phi+
        // written in the swapped pairing is sum_k |beta_k>|beta_k> / 2 up to signs.
        EXPECT_TRUE(same_ray(left, bell_state(outcome)));
        EXPECT_TRUE(same_ray(pool.pair_state(a1, b2), bell_state(outcome)));
    }
}

TEST(qubit_pool, measure_splits_entangled_register) {
    Rng rng(13);
    QubitPool pool;
    const auto [a, b] = pool.add_pair(bell_pair());
    const int oa = pool.measure(a, Basis::X, rng);
    EXPECT_FALSE(pool.is_entangled(b));
    EXPECT_TRUE(same_ray(pool.single_state(b), prepare_bb84(Basis::X, oa)));
}

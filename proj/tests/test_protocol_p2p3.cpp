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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>

#include <gtest/gtest.h>

#include "qbc/protocol_p2p3.hpp"
#include "stats_util.hpp"

namespace qbc {
namespace {

const char *state_name(Bb84State s) {
    static const char *names[2][2] = {{"0", "1"}, {"+", "-"}};
    return names[s.basis == Basis::X][s.bit];
}

TEST(action, names_follow_table_order) {
    std::string names;
    for (const Action &a : Action::all()) {
        names += a.name() + " ";
    }
    EXPECT_EQ(names, "II IX IY IZ HI HX HY HZ ");
    EXPECT_EQ(Action::from_name("HY"), Action::all()[6]);
    EXPECT_THROW(Action::from_name("XX"), std::invalid_argument);
}

// Returned states by action, columns |0>, |1>, |+>, |->.
TEST(action, honest_states_match_reference_table) {
    const std::map<std::string, std::string> table = {
        {"II", "01+-"}, {"IX", "10+-"}, {"IY", "10-+"}, {"IZ", "01-+"},
        {"HI", "+-01"}, {"HX", "+-10"}, {"HY", "-+10"}, {"HZ", "-+01"},
    };
    int cells = 0;
    for (const Action &act : Action::all()) {
        const std::string &row = table.at(act.name());
        const auto inputs = Bb84State::all();
        for (size_t c = 0; c < 4; ++c) {
            EXPECT_EQ(std::string(state_name(honest_state(act, inputs[c]))), std::string(1, row[c]))
                << act.name() << " on " << state_name(inputs[c]);
            ++cells;
        }
    }
    EXPECT_EQ(cells, 32);
}

TEST(action, undo_inverts_apply) {
    for (const Action &act : Action::all()) {
        for (const auto &s : Bb84State::all()) {
            EXPECT_TRUE(same_ray(undo_action(apply_action(prepare_bb84(s), act), act), prepare_bb84(s)));
        }
    }
}

TEST(evidence_string, is_fixed_once_announced) {
    static_assert(!std::is_copy_assignable_v<EvidenceString>);
    const EvidenceString ev({0, 1, 1, 0}, 2);
    EXPECT_EQ(ev.str(), "0110");
    EXPECT_EQ(ev.m1(), (std::vector<int>{0, 1}));
    EXPECT_EQ(ev.m2(), (std::vector<int>{1, 0}));
    EXPECT_THROW(EvidenceString({0, 2}), std::invalid_argument);
}

TEST(p2, params_validate) {
    EXPECT_THROW((P2Params{0, true}.validate()), std::invalid_argument);
    EXPECT_THROW((P3Params{3}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((P3Params{4}.validate()));
}

TEST(p2, randomize_applies_op_then_pad_then_shuffle) {
    QubitPool pool;
    Rng rng(5);
    auto [record, sent] = p2_alice_prepare(6, pool, rng);
    auto [bob, returned] = p2_bob_randomize(sent, pool, rng);
    ASSERT_TRUE(bob.perm.is_bijection());
    for (int k = 0; k < 6; ++k) {
        const Register got = pool.single_state(returned[bob.perm(k)]);
        EXPECT_TRUE(same_ray(got, prepare_bb84(honest_state(bob.actions[k], record[k]))));
        EXPECT_EQ(bob.source_of(bob.perm(k)), k);
    }
}

TEST(p2, honest_runs_accept) {
    for (int a = 0; a < 2; ++a) {
        for (int i = 0; i < 200; ++i) {
            const P2Outcome out = p2_run({4, true}, a, a, Rng(trial_seed(11, i)));
            ASSERT_TRUE(out.check_passed);
            ASSERT_TRUE(out.verdict.accepted());
        }
    }
}

TEST(p2, announces_one_bit_per_survivor) {
    MessageLog log;
    const P2Outcome out = p2_run({3, true}, 0, 0, Rng(3), &log);
    EXPECT_TRUE(out.verdict.accepted());
    bool saw_commit = false;
    for (const auto &e : log.entries()) {
        if (e.step == "C6") {
            EXPECT_EQ(e.payload.at("M").get<std::string>().size(), 3u);
            saw_commit = true;
        }
    }
    EXPECT_TRUE(saw_commit);
}

TEST(p2, verify_rejects_malformed_records) {
    const BobRandomization bob = BobRandomization::identity(2);
    const std::vector<Bb84State> record = {{Basis::Z, 0}, {Basis::Z, 1}};
    EXPECT_EQ(p2_bob_verify(0, record, {0}, bob, {0, 1}).reason, FailureReason::Malformed);
    EXPECT_EQ(p2_bob_verify(2, record, {0, 1}, bob, {0, 1}).reason, FailureReason::Malformed);
    EXPECT_TRUE(p2_bob_verify(0, record, {0, 1}, bob, {0, 1}).accepted());
    EXPECT_EQ(p2_bob_verify(0, record, {1, 1}, bob, {0, 1}).reason, FailureReason::EvidenceMismatch);
    // Conjugate-basis positions never contradict.
    EXPECT_TRUE(p2_bob_verify(1, record, {1, 0}, bob, {0, 1}).accepted());
}

// Single-qubit oracle for opening the other basis: Bob's state is uniform
// over BB84, Alice's outcome is from the commit basis.
double wrong_basis_pass_per_qubit() {
    double pass = 0;
    for (const auto &phi : Bb84State::all()) {
        for (int m = 0; m < 2; ++m) {
            const double p_m = phi.basis == Basis::Z ? (phi.bit == m ? 1.0 : 0.0) : 0.5;
            const bool contradicts = phi.basis == Basis::X && phi.bit != m;
            pass += 0.25 * p_m * (contradicts ? 0.0 : 1.0);
        }
    }
    return pass;
}

TEST(p2, wrong_basis_opening_matches_oracle) {
    EXPECT_NEAR(wrong_basis_pass_per_qubit(), 0.75, 1e-12);
    const int trials = 4000;
    for (int n : {4, 8, 16}) {
        int accepted = 0;
        for (int i = 0; i < trials; ++i) {
            accepted += p2_run({n, true}, 0, 1, Rng(trial_seed(100 + n, i))).verdict.accepted();
        }
        const double expected = std::pow(wrong_basis_pass_per_qubit(), n);
        EXPECT_TRUE(qbc_test::within_sigma(accepted / double(trials), expected, trials))
            << "n=" << n << " observed " << accepted / double(trials) << " expected " << expected;
    }
}

TEST(p2, wrong_basis_failures_name_evidence) {
    for (int i = 0; i < 50; ++i) {
        const P2Outcome out = p2_run({8, true}, 1, 0, Rng(trial_seed(8, i)));
        if (!out.verdict.accepted()) {
            EXPECT_EQ(out.verdict.reason, FailureReason::EvidenceMismatch);
        }
    }
}

// Per-checked-qubit detection when Bob replaces each qubit with a random
// BB84 state: Alice's inverted state is uniform and independent of hers.
double substitution_detection_per_qubit() {
    double pass = 0;
    for (const auto &psi : Bb84State::all()) {
        for (const auto &sub : Bb84State::all()) {
            pass += 1.0 / 16 * overlap_sq(prepare_bb84(psi), prepare_bb84(sub));
        }
    }
    return 1 - pass;
}

// Measuring in Z first disturbs exactly the X-basis preparations.
double measure_z_detection_per_qubit() {
    double pass = 0;
    for (const auto &psi : Bb84State::all()) {
        for (int m = 0; m < 2; ++m) {
            const Register collapsed = prepare_bb84(Basis::Z, m);
            const double p_m = overlap_sq(prepare_bb84(psi), collapsed);
            pass += 0.25 * p_m * overlap_sq(prepare_bb84(psi), collapsed);
        }
    }
    return 1 - pass;
}

TEST(p2, check_phase_catches_tampering) {
    EXPECT_NEAR(substitution_detection_per_qubit(), 0.5, 1e-12);
    EXPECT_NEAR(measure_z_detection_per_qubit(), 0.25, 1e-12);
    const int trials = 4000;
    for (int n : {1, 2, 4}) {
        int caught_sub = 0, caught_mz = 0;
        for (int i = 0; i < trials; ++i) {
            caught_sub += !p2_run({n, true}, 0, 0, Rng(trial_seed(40 + n, i)), nullptr, BobTamper::Substitute)
                               .check_passed;
            caught_mz +=
                !p2_run({n, true}, 0, 0, Rng(trial_seed(50 + n, i)), nullptr, BobTamper::MeasureZ).check_passed;
        }
        const double sub = 1 - std::pow(1 - substitution_detection_per_qubit(), n);
        const double mz = 1 - std::pow(1 - measure_z_detection_per_qubit(), n);
        EXPECT_TRUE(qbc_test::within_sigma(caught_sub / double(trials), sub, trials)) << "n=" << n;
        EXPECT_TRUE(qbc_test::within_sigma(caught_mz / double(trials), mz, trials)) << "n=" << n;
        EXPECT_GE(caught_sub / double(trials) + 3 * qbc_test::binomial_sigma(sub, trials),
                  1 - std::pow(5.0 / 8.0, n));
    }
}

// ---------------------------------------------------------------------------
// Bell attack.

TEST(bell_attack, table_exclusion_rules_out_orthogonal_identity_actions) {
    // I-row actions leave Phi+, Phi-, Psi+, Psi- respectively.
    const std::map<BellIndex, std::string> excluded = {
        {BellIndex::PhiPlus, "IX IY IZ "},
        {BellIndex::PhiMinus, "II IX IY "},
        {BellIndex::PsiPlus, "II IY IZ "},
        {BellIndex::PsiMinus, "II IX IZ "},
    };
    int pairs = 0;
    for (BellIndex b : kBellIndices) {
        std::string got;
        for (const Action &a : bell_excluded_actions_by_table(b)) {
            got += a.name() + " ";
        }
        EXPECT_EQ(got, excluded.at(b)) << to_string(b);
        pairs += 8;
    }
    EXPECT_EQ(pairs, 32);
}

TEST(bell_attack, exact_overlap_also_rules_out_two_hadamard_actions) {
    for (BellIndex b : kBellIndices) {
        int hadamard = 0, identity = 0;
        for (const Action &a : bell_compatible_actions(b)) {
            (a.hadamard ? hadamard : identity)++;
        }
        EXPECT_EQ(identity, 1) << to_string(b);
        EXPECT_EQ(hadamard, 2) << to_string(b);
    }
    std::string got;
    for (const Action &a : bell_compatible_actions(BellIndex::PhiMinus)) {
        got += a.name() + " ";
    }
    EXPECT_EQ(got, "IZ HI HY ");
}

TEST(bell_attack, claims_for_phi_minus) {
    const auto name = [](BellIndex b, int m, int t) {
        return std::string(state_name(bell_attack_claim(b, m, t)));
    };
    EXPECT_EQ(name(BellIndex::PhiMinus, 0, 0), "0");
    EXPECT_EQ(name(BellIndex::PhiMinus, 0, 1), "-");
    EXPECT_EQ(name(BellIndex::PhiMinus, 1, 0), "1");
    EXPECT_EQ(name(BellIndex::PhiMinus, 1, 1), "+");
    for (BellIndex b : kBellIndices) {
        for (int m = 0; m < 2; ++m) {
            for (int t = 0; t < 2; ++t) {
                EXPECT_NO_THROW(bell_attack_claim(b, m, t));
            }
        }
    }
}

TEST(bell_attack, succeeds_without_shuffle) {
    for (int t = 0; t < 2; ++t) {
        for (int i = 0; i < 300; ++i) {
            ASSERT_TRUE(p2_attack_bell({8, false}, t, Rng(trial_seed(70 + t, i))).accepted());
        }
    }
}

// Exact acceptance of the shuffled attack by brute force: all shuffles and
// actions, the 2n-qubit state vector projected outcome by outcome.
double shuffled_bell_attack_oracle(int n, int target) {
    const std::map<std::string, std::string> table = {
        {"II", "01+-"}, {"IX", "10+-"}, {"IY", "10-+"}, {"IZ", "01-+"},
        {"HI", "+-01"}, {"HX", "+-10"}, {"HY", "-+10"}, {"HZ", "-+01"},
    };
    const std::string prep_names = "01+-";
    const int qubits = 2 * n;  // A_0..A_{n-1}, B_0..B_{n-1}
    const auto bit_of = [&](size_t idx, int q) { return (idx >> (qubits - 1 - q)) & 1; };
    const auto actions = Action::all();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0;
    int perm_count = 0;
    do {
        ++perm_count;
        std::vector<int> source(n);  // source[position] = k
        for (int k = 0; k < n; ++k) {
            source[perm[k]] = k;
        }
        std::vector<int> choice(n, 0);
        for (int code = 0; code < (1 << (3 * n)); ++code) {
            for (int k = 0; k < n; ++k) {
                choice[k] = (code >> (3 * k)) & 7;
            }
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(size_t{1} << qubits);
            for (size_t idx = 0; idx < size_t(v.size()); ++idx) {
                bool paired = true;
                for (int k = 0; k < n; ++k) {
                    paired = paired && bit_of(idx, k) == bit_of(idx, n + k);
                }
                if (paired) {
                    v[idx] = std::pow(kInvSqrt2, n);
                }
            }
            for (int k = 0; k < n; ++k) {
                const Action &act = actions[choice[k]];
                if (act.hadamard) {
                    detail::apply_mat2(std::span(v.data(), v.size()), qubits, n + k, gate_matrix(Gate::H));
                }
                apply_pauli_bits(std::span(v.data(), v.size()), qubits, n + k, act.pad);
            }
            // Recursive enumeration of Bell outcomes, position by position.
            std::vector<BellIndex> outcome(n);
            std::function<void(int, const Eigen::VectorXcd &)> branch = [&](int j, const Eigen::VectorXcd &state) {
                if (j == n) {
                    const double p = state.squaredNorm();
                    for (int mcode = 0; mcode < (1 << n); ++mcode) {
                        std::vector<int> m(n);
                        std::vector<char> claim(n);
                        for (int q = 0; q < n; ++q) {
                            m[q] = (mcode >> q) & 1;
                            claim[q] = state_name(bell_attack_claim(outcome[q], m[q], target))[0];
                        }
                        bool ok = true;
                        for (int pos = 0; pos < n; ++pos) {
                            const int k = source[pos];
                            const char phi =
                                table.at(actions[choice[k]].name())[prep_names.find(claim[k])];
                            const bool in_basis = target == 0 ? (phi == '0' || phi == '1') : (phi == '+' || phi == '-');
                            const int bit = (phi == '1' || phi == '-') ? 1 : 0;
                            ok = ok && !(in_basis && bit != m[pos]);
                        }
                        total += ok ? p / (1 << n) : 0.0;
                    }
                    return;
                }
                const int a = j, b = n + source[j];
                for (BellIndex bell : kBellIndices) {
                    const auto amp = bell_amplitudes(bell);
                    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(state.size());
                    for (size_t idx = 0; idx < size_t(state.size()); ++idx) {
                        const size_t row = bit_of(idx, a) * 2 + bit_of(idx, b);
                        cplx acc = 0;
                        for (size_t col = 0; col < 4; ++col) {
                            size_t other = idx;
                            other &= ~(size_t{1} << (qubits - 1 - a));
                            other &= ~(size_t{1} << (qubits - 1 - b));
                            other |= (col >> 1) << (qubits - 1 - a);
                            other |= (col & 1) << (qubits - 1 - b);
                            acc += std::conj(amp[col]) * state[other];
                        }
                        next[idx] = amp[row] * acc;
                    }
                    if (next.squaredNorm() > 1e-15) {
                        outcome[j] = bell;
                        branch(j + 1, next);
                    }
                }
            };
            branch(0, v);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total / perm_count / (1 << (3 * n));
}

TEST(bell_attack, shuffled_rate_matches_exact_oracle) {
    const int n = 3;
    const int trials = 20000;
    for (int t = 0; t < 2; ++t) {
        const double exact = shuffled_bell_attack_oracle(n, t);
        EXPECT_LT(exact, 1.0);
        int accepted = 0;
        for (int i = 0; i < trials; ++i) {
            accepted += p2_attack_bell({n, true}, t, Rng(trial_seed(80 + t, i))).accepted();
        }
        EXPECT_TRUE(qbc_test::within_sigma(accepted / double(trials), exact, trials))
            << "target " << t << " observed " << accepted / double(trials) << " exact " << exact;
    }
}

TEST(bell_attack, shuffle_defeats_it) {
    const int trials = 4000;
    const int n = 8;
    for (int t = 0; t < 2; ++t) {
        int accepted = 0;
        for (int i = 0; i < trials; ++i) {
            accepted += p2_attack_bell({n, true}, t, Rng(trial_seed(90 + t, i))).accepted();
        }
        const double rate = accepted / double(trials);
        EXPECT_LT(rate + 3 * qbc_test::binomial_sigma(rate, trials), 1.0) << "target " << t;
    }
}

// ---------------------------------------------------------------------------
// P3.

TEST(p3, honest_runs_accept) {
    for (int a = 0; a < 2; ++a) {
        for (int i = 0; i < 200; ++i) {
            const P3Outcome out = p3_run({4}, a, a, Rng(trial_seed(21, i)));
            ASSERT_TRUE(out.check_passed);
            ASSERT_TRUE(out.verdict.accepted()) << to_string(out.verdict.reason);
        }
    }
}

TEST(p3, evidence_splits_in_halves) {
    P3Commitment c;
    p3_commit(c, {6}, 1, Rng(4));
    ASSERT_TRUE(c.evidence.has_value());
    EXPECT_EQ(c.evidence->m1().size(), 3u);
    EXPECT_EQ(c.evidence->m2().size(), 3u);
    EXPECT_EQ(c.withheld.size(), 3u);
    std::vector<int> m = c.evidence->m1();
    m.insert(m.end(), c.withheld.begin(), c.withheld.end());
    EXPECT_EQ(m, c.session.m->bits());
}

TEST(p3, matches_p2_when_certificate_ignored) {
    for (int i = 0; i < 500; ++i) {
        const Rng rng(trial_seed(31, i));
        for (auto [a, b] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 0}}) {
            const P2Outcome p2 = p2_run({6, true}, a, b, rng);
            const P3Outcome p3 = p3_run({6}, a, b, rng, nullptr, WithheldStrategy::Keep, false);
            ASSERT_EQ(p2.verdict, p3.verdict) << "trial " << i;
            ASSERT_EQ(p2.verdict, p3.p2_part);
        }
    }
}

// Re-guessing a withheld bit changes its basis with probability 1/2, and a
// changed basis fails the certificate with probability 1/2.
TEST(p3, reguessed_opening_falls_below_p2) {
    const int n = 8;
    const int trials = 4000;
    int keep = 0, reguess = 0;
    for (int i = 0; i < trials; ++i) {
        const Rng rng(trial_seed(33, i));
        keep += p3_run({n}, 0, 1, rng, nullptr, WithheldStrategy::Keep).verdict.accepted();
        reguess += p3_run({n}, 0, 1, rng, nullptr, WithheldStrategy::Reguess).verdict.accepted();
    }
    const double p2_only = std::pow(0.75, n);
    const double expected = p2_only * std::pow(0.75, n / 2);
    EXPECT_TRUE(qbc_test::within_sigma(keep / double(trials), p2_only, trials));
    EXPECT_TRUE(qbc_test::within_sigma(reguess / double(trials), expected, trials));
    EXPECT_LT(reguess / double(trials) + 3 * qbc_test::binomial_sigma(expected, trials),
              p2_only - 3 * qbc_test::binomial_sigma(p2_only, trials));
}

TEST(p3, certificate_failure_is_named) {
    int seen = 0;
    for (int i = 0; i < 200 && seen == 0; ++i) {
        const P3Outcome out = p3_run({4}, 0, 1, Rng(trial_seed(35, i)), nullptr, WithheldStrategy::Reguess);
        if (out.p2_part.accepted() && !out.verdict.accepted()) {
            EXPECT_EQ(out.verdict.reason, FailureReason::CertificateMismatch);
            ++seen;
        }
    }
    EXPECT_EQ(seen, 1);
}

TEST(p3, pstar_and_premeasurement_control) {
    const int trials = 2000;
    const double same = p3_estimate_pstar({8}, 0, 0, trials, 5);
    const double flipped = p3_estimate_pstar({8}, 0, 1, trials, 5);
    EXPECT_EQ(same, 1.0);
    EXPECT_TRUE(qbc_test::within_sigma(flipped, std::pow(0.75, 8), trials));
    EXPECT_LT(same + flipped, 1.0 + std::pow(0.75, 8) + 3 * qbc_test::binomial_sigma(std::pow(0.75, 8), trials));
    EXPECT_EQ(p3_estimate_pstar({8}, 0, 0, 200, 6, false), 1.0);
    EXPECT_EQ(p3_estimate_pstar({8}, 0, 1, 200, 6, false), 1.0);
}

// ---------------------------------------------------------------------------
// Hiding.

TEST(hiding, plugin_mutual_information) {
    EXPECT_NEAR(plugin_mutual_information({{10, 0}, {0, 10}}), 1.0, 1e-12);
    EXPECT_NEAR(plugin_mutual_information({{5, 5}, {5, 5}}), 0.0, 1e-12);
    EXPECT_NEAR(plugin_mutual_information({{3, 1}, {1, 3}}), 1 - (-(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25))),
                1e-12);
}

TEST(hiding, bob_learns_nothing_about_the_bit) {
    const HidingEstimate h = p2_hiding_estimate({8, true}, 10000, 17);
    EXPECT_LE(h.max(), 0.01) << "per-position " << h.per_position << " weight " << h.weight;
}

}  // namespace
}  // namespace qbc

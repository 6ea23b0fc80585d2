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

// Commitments with classical evidence built on double-blind states.
//
// P2: Alice prepares 2n random BB84 states; Bob applies I or H, a Pauli pad
// and a shuffle to them and sends them back. Alice spot-checks n of them
// (Bob reveals his operations there), then measures the other n in Z (bit 0)
// or X (bit 1) and announces the outcomes M. To open she reveals her
// preparations, which lets Bob recompute every measured state.
//
// P3 adds n/2 halves of |Phi+> from Bob. Alice measures half j in the basis
// named by bit n/2 + j of M (0 -> Z, 1 -> X), announces the first half of M
// together with those outcomes, and withholds the second half of M until the
// unveil.
//
// Every step draws from its own labelled stream of the trial generator, so
// a P3 run and a P2 run with the same seed perform identical P2 steps.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbc/protocol_common.hpp"
#include "qbc/qubit_pool.hpp"

namespace qbc {

// ---------------------------------------------------------------------------
// Bob's per-qubit randomization: basis op (I or H), then pad X^x Z^z.

struct Action {
    bool hadamard = false;
    PauliBits pad;

    friend bool operator==(const Action &, const Action &) = default;

    std::string name() const {
        const char *p = !pad.x ? (pad.z ? "Z" : "I") : (pad.z ? "Y" : "X");
        return std::string(hadamard ? "H" : "I") + p;
    }

    /// The eight actions in the order II, IX, IY, IZ, HI, HX, HY, HZ.
    static std::array<Action, 8> all() {
        std::array<Action, 8> out;
        const std::array<PauliBits, 4> pads = {PauliBits{false, false}, PauliBits{true, false}, PauliBits{true, true},
                                               PauliBits{false, true}};
        for (size_t h = 0; h < 2; ++h) {
            for (size_t p = 0; p < 4; ++p) {
                out[4 * h + p] = {h == 1, pads[p]};
            }
        }
        return out;
    }

    static Action random(Rng &rng) {
        return all()[rng.below(8)];
    }

    static Action from_name(const std::string &s) {
        for (const Action &a : all()) {
            if (a.name() == s) {
                return a;
            }
        }
        throw std::invalid_argument("Action::from_name: unknown action " + s);
    }
};

inline Register apply_action(Register reg, const Action &act, int target = 0) {
    if (act.hadamard) {
        reg = apply_1q(std::move(reg), Gate::H, target);
    }
    apply_pauli_bits(reg.amplitudes_mut(), reg.n_qubits(), target, act.pad);
    return reg;
}

/// Undoes an action: pad first (self-inverse up to phase), then H.
inline Register undo_action(Register reg, const Action &act) {
    apply_pauli_bits(reg.amplitudes_mut(), reg.n_qubits(), 0, act.pad);
    if (act.hadamard) {
        reg = apply_1q(std::move(reg), Gate::H, 0);
    }
    return reg;
}

/// Which BB84 state a register is, up to phase.
inline std::optional<Bb84State> identify_bb84(const Register &reg) {
    if (reg.n_qubits() != 1) {
        return std::nullopt;
    }
    for (const auto &s : Bb84State::all()) {
        if (same_ray(reg, prepare_bb84(s), 1e-9)) {
            return s;
        }
    }
    return std::nullopt;
}

/// State Bob's action turns Alice's preparation into.
inline Bb84State honest_state(const Action &act, Bb84State prepared) {
    return *identify_bb84(apply_action(prepare_bb84(prepared), act));
}

inline Basis commit_basis(int a) { return a == 0 ? Basis::Z : Basis::X; }

// ---------------------------------------------------------------------------
// Classical records.

struct P2Params {
    int n = 1;
    bool scramble = true;

    void validate() const {
        if (n < 1) {
            throw std::invalid_argument("P2Params: n must be positive");
        }
    }
};

/// Bob's secrets. actions[k] is applied to Alice's qubit k, which is then
/// sent at position perm(k).
struct BobRandomization {
    std::vector<Action> actions;
    Permutation perm;

    int source_of(int position) const { return perm.inverse()(position); }

    static BobRandomization identity(int size) {
        return {std::vector<Action>(static_cast<size_t>(size)), Permutation::identity(size)};
    }
};

/// Announced classical evidence; fixed at construction.
class EvidenceString {
  public:
    explicit EvidenceString(std::vector<int> bits, size_t first_part = 0)
        : bits_(std::move(bits)), split_(first_part == 0 ? bits_.size() : first_part) {
        for (int b : bits_) {
            if (b != 0 && b != 1) {
                throw std::invalid_argument("EvidenceString: bits must be 0 or 1");
            }
        }
        if (split_ > bits_.size()) {
            throw std::invalid_argument("EvidenceString: split beyond the string");
        }
    }
    EvidenceString(const EvidenceString &) = default;
    EvidenceString &operator=(const EvidenceString &) = delete;

    const std::vector<int> &bits() const { return bits_; }
    size_t size() const { return bits_.size(); }

    /// P3 parts: M1 is the first `first_part` bits, M2 the rest.
    std::vector<int> m1() const { return {bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(split_)}; }
    std::vector<int> m2() const { return {bits_.begin() + static_cast<std::ptrdiff_t>(split_), bits_.end()}; }

    std::string str() const { return bits_to_string(bits_); }

  private:
    const std::vector<int> bits_;
    const size_t split_;
};

// ---------------------------------------------------------------------------
// Steps.

inline std::pair<std::vector<Bb84State>, std::vector<QubitRef>> p2_alice_prepare(int count, QubitPool &pool,
                                                                                 Rng &rng) {
    std::vector<Bb84State> record;
    std::vector<QubitRef> out;
    for (int k = 0; k < count; ++k) {
        record.push_back(Bb84State::random(rng));
        out.push_back(pool.add(prepare_bb84(record.back())));
    }
    return {std::move(record), std::move(out)};
}

/// Applies the given randomization and returns the qubits by position.
inline std::vector<QubitRef> p2_bob_apply(const BobRandomization &r, const std::vector<QubitRef> &in,
                                          QubitPool &pool) {
    std::vector<QubitRef> out(in.size());
    for (size_t k = 0; k < in.size(); ++k) {
        if (r.actions[k].hadamard) {
            pool.apply(in[k], Gate::H);
        }
        pool.apply_pauli(in[k], r.actions[k].pad);
        out[r.perm(static_cast<int>(k))] = in[k];
    }
    return out;
}

inline std::pair<BobRandomization, std::vector<QubitRef>> p2_bob_randomize(const std::vector<QubitRef> &in,
                                                                           QubitPool &pool, Rng &rng,
                                                                           bool scramble = true) {
    BobRandomization r;
    for (size_t k = 0; k < in.size(); ++k) {
        r.actions.push_back(Action::random(rng));
    }
    r.perm = scramble ? Permutation::random(static_cast<int>(in.size()), rng)
                      : Permutation::identity(static_cast<int>(in.size()));
    return {r, p2_bob_apply(r, in, pool)};
}

/// Dishonest Bob behaviours tested against the check phase.
enum class BobTamper : uint8_t { None, Substitute, MeasureZ };

/// Applied to Alice's qubits before Bob's honest-looking randomization.
inline void p2_bob_tamper(BobTamper kind, const std::vector<QubitRef> &in, QubitPool &pool, Rng &rng) {
    for (QubitRef q : in) {
        switch (kind) {
            case BobTamper::None:
                break;
            case BobTamper::Substitute:
                pool.replace(q, prepare_bb84(Bb84State::random(rng)), rng);
                break;
            case BobTamper::MeasureZ:
                pool.measure(q, Basis::Z, rng);
                break;
        }
    }
}

struct CheckResult {
    bool passed = false;
    std::vector<int> checked_positions;
    std::vector<int> survivor_positions;
    std::vector<QubitRef> survivors;
};

/// Alice picks n positions, Bob reveals source and action for each, and
/// Alice undoes the action and tests for her own preparation.
inline CheckResult p2_check_phase(const std::vector<Bb84State> &record, const std::vector<QubitRef> &received,
                                  const BobRandomization &bob, QubitPool &pool, Rng &rng, int n,
                                  MessageLog *log = nullptr) {
    const int total = static_cast<int>(received.size());
    CheckResult res;
    res.checked_positions = random_subset(total, n, rng);
    std::vector<char> checked(total, 0);
    for (int p : res.checked_positions) {
        checked[p] = 1;
    }
    nlohmann::json disclosures = nlohmann::json::array();
    res.passed = true;
    for (int p : res.checked_positions) {
        const int k = bob.source_of(p);
        const Action &act = bob.actions[k];
        disclosures.push_back({{"position", p}, {"source", k}, {"action", act.name()}});
        const QubitRef q = received[p];
        pool.apply_pauli(q, act.pad);
        if (act.hadamard) {
            pool.apply(q, Gate::H);
        }
        if (!pool.check(q, record[k], rng)) {
            res.passed = false;
        }
    }
    for (int p = 0; p < total; ++p) {
        if (!checked[p]) {
            res.survivor_positions.push_back(p);
            res.survivors.push_back(received[p]);
        }
    }
    log_message(log, "bob", "C4", {{"disclosures", disclosures}, {"passed", res.passed}});
    return res;
}

inline EvidenceString p2_alice_commit(int a, const std::vector<QubitRef> &survivors, QubitPool &pool, Rng &rng,
                                      MessageLog *log = nullptr) {
    if (a != 0 && a != 1) {
        throw std::invalid_argument("p2_alice_commit: bit must be 0 or 1");
    }
    std::vector<int> m;
    for (QubitRef q : survivors) {
        m.push_back(pool.measure(q, commit_basis(a), rng));
    }
    EvidenceString ev(std::move(m));
    log_message(log, "alice", "C6", {{"M", ev.str()}});
    return ev;
}

/// Rejects only when some M_j contradicts a state that is an eigenstate of
/// the opened basis; conjugate-basis positions carry no information.
inline Verdict p2_bob_verify(int a, const std::vector<Bb84State> &record, const std::vector<int> &m,
                             const BobRandomization &bob, const std::vector<int> &survivor_positions) {
    if ((a != 0 && a != 1) || record.size() != bob.actions.size() || m.size() != survivor_positions.size()) {
        return Verdict::reject(FailureReason::Malformed);
    }
    const Permutation inv = bob.perm.inverse();
    for (size_t j = 0; j < m.size(); ++j) {
        const int k = inv(survivor_positions[j]);
        const Bb84State phi = honest_state(bob.actions[k], record[k]);
        if (phi.basis == commit_basis(a) && phi.bit != m[j]) {
            return Verdict::reject(FailureReason::EvidenceMismatch);
        }
    }
    return Verdict::accept();
}

/// Bob's private record, logged so transcripts can be re-verified.
inline nlohmann::json bob_record_json(const BobRandomization &bob, const std::vector<int> &survivors) {
    nlohmann::json actions = nlohmann::json::array();
    for (const Action &a : bob.actions) {
        actions.push_back(a.name());
    }
    return {{"actions", actions}, {"perm", bob.perm.image}, {"survivors", survivors}};
}

// ---------------------------------------------------------------------------
// Whole P2 runs.

struct P2Outcome {
    bool check_passed = false;
    Verdict verdict;
};

namespace detail {

// State shared by P2 and P3 runs up to the end of the P2 commit steps.
struct P2Session {
    QubitPool pool;
    std::vector<Bb84State> record;
    BobRandomization bob;
    CheckResult check;
    std::optional<EvidenceString> m;
};

inline void p2_commit_steps(P2Session &s, const P2Params &params, int commit_bit, const Rng &rng, BobTamper tamper,
                            MessageLog *log) {
    params.validate();
    Rng prep = rng.child("alice.prepare");
    auto [record, sent] = p2_alice_prepare(2 * params.n, s.pool, prep);
    s.record = std::move(record);
    log_message(log, "alice", "C1", {{"qubits", 2 * params.n}});
    Rng tamper_rng = rng.child("bob.tamper");
    p2_bob_tamper(tamper, sent, s.pool, tamper_rng);
    Rng rand = rng.child("bob.randomize");
    auto [bob, returned] = p2_bob_randomize(sent, s.pool, rand, params.scramble);
    s.bob = std::move(bob);
    log_message(log, "bob", "C3", {{"qubits", 2 * params.n}});
    Rng check = rng.child("alice.check");
    s.check = p2_check_phase(s.record, returned, s.bob, s.pool, check, params.n, log);
    if (!s.check.passed) {
        return;
    }
    Rng commit = rng.child("alice.commit");
    s.m.emplace(p2_alice_commit(commit_bit, s.check.survivors, s.pool, commit, nullptr));
}

}  // namespace detail

/// Honest commit to `commit_bit`, opened as `open_bit` (a wrong-basis
/// opening when they differ). Alice aborts if the check phase fails.
inline P2Outcome p2_run(const P2Params &params, int commit_bit, int open_bit, const Rng &rng,
                        MessageLog *log = nullptr, BobTamper tamper = BobTamper::None) {
    detail::P2Session s;
    detail::p2_commit_steps(s, params, commit_bit, rng, tamper, log);
    if (!s.check.passed) {
        log_message(log, "alice", "abort", {{"reason", "check_failed"}});
        return {false, Verdict::reject(FailureReason::Malformed)};
    }
    log_message(log, "alice", "C6", {{"M", s.m->str()}});
    log_message(log, "bob", "R", bob_record_json(s.bob, s.check.survivor_positions));
    log_message(log, "alice", "U1", {{"a", open_bit}, {"record", states_to_json(s.record)}});
    const Verdict v = p2_bob_verify(open_bit, s.record, s.m->bits(), s.bob, s.check.survivor_positions);
    log_message(log, "bob", "U3", {{"accepted", v.accepted()}, {"reason", to_string(v.reason)}});
    return {true, v};
}

// ---------------------------------------------------------------------------
// Bell-measurement attack: Alice sends halves of |Phi+> instead of BB84
// states, Bell-measures each kept half with the qubit returned at the same
// position, announces a random M and picks her claimed preparation afterwards.

/// Actions whose effect on the sent half leaves Alice's pair with non-zero
/// overlap on Bell state `b`.
inline std::vector<Action> bell_compatible_actions(BellIndex b) {
    std::vector<Action> out;
    const Register target = bell_state(b);
    for (const Action &act : Action::all()) {
        const Register pair = apply_action(bell_pair(), act, 1);
        if (overlap_sq(target, pair) > 1e-12) {
            out.push_back(act);
        }
    }
    return out;
}

/// Exclusion read off the table of Alice's pair states: an identity-basis
/// action is ruled out when it leaves a Bell state orthogonal to the outcome;
/// Hadamard actions leave product-basis mixtures and are never ruled out.
inline std::vector<Action> bell_excluded_actions_by_table(BellIndex b) {
    const auto compatible = bell_compatible_actions(b);
    std::vector<Action> out;
    for (const Action &act : Action::all()) {
        if (!act.hadamard && std::find(compatible.begin(), compatible.end(), act) == compatible.end()) {
            out.push_back(act);
        }
    }
    return out;
}

/// The preparation Alice claims so that, for every action not excluded by
/// the table, the recomputed state either lies in the conjugate basis or
/// agrees with the announced bit m in the opened basis.
inline Bb84State bell_attack_claim(BellIndex b, int m, int target) {
    const auto excluded = bell_excluded_actions_by_table(b);
    std::vector<Bb84State> found;
    for (const auto &psi : Bb84State::all()) {
        bool ok = true;
        for (const Action &act : Action::all()) {
            if (std::find(excluded.begin(), excluded.end(), act) != excluded.end()) {
                continue;
            }
            const Bb84State phi = honest_state(act, psi);
            if (phi.basis == commit_basis(target) && phi.bit != m) {
                ok = false;
                break;
            }
        }
        if (ok) {
            found.push_back(psi);
        }
    }
    if (found.size() != 1) {
        throw std::logic_error("bell_attack_claim: claim is not unique");
    }
    return found.front();
}

/// Runs the attack on n qubits with the check phase waived. With
/// params.scramble the returned qubits are shuffled and Alice's pairing
/// by position is wrong.
inline Verdict p2_attack_bell(const P2Params &params, int target_bit, const Rng &rng, MessageLog *log = nullptr) {
    params.validate();
    QubitPool pool;
    std::vector<QubitRef> kept, sent;
    for (int k = 0; k < params.n; ++k) {
        const auto [a, b] = pool.add_pair(bell_pair());
        kept.push_back(a);
        sent.push_back(b);
    }
    log_message(log, "alice", "C1", {{"qubits", params.n}});
    Rng rand = rng.child("bob.randomize");
    auto [bob, returned] = p2_bob_randomize(sent, pool, rand, params.scramble);
    Rng alice = rng.child("alice.commit");
    std::vector<int> m;
    std::vector<Bb84State> claims;
    for (int j = 0; j < params.n; ++j) {
        const BellIndex outcome = pool.bell_measure(kept[j], returned[j], alice);
        m.push_back(alice.bit() ? 1 : 0);
        claims.push_back(bell_attack_claim(outcome, m.back(), target_bit));
    }
    std::vector<int> positions(static_cast<size_t>(params.n));
    std::iota(positions.begin(), positions.end(), 0);
    log_message(log, "alice", "C6", {{"M", bits_to_string(m)}});
    log_message(log, "bob", "R", bob_record_json(bob, positions));
    log_message(log, "alice", "U1", {{"a", target_bit}, {"record", states_to_json(claims)}});
    const Verdict v = p2_bob_verify(target_bit, claims, m, bob, positions);
    log_message(log, "bob", "U3", {{"accepted", v.accepted()}, {"reason", to_string(v.reason)}});
    return v;
}

// ---------------------------------------------------------------------------
// P3.

struct P3Params {
    int n = 2;

    void validate() const {
        if (n < 2 || n % 2 != 0) {
            throw std::invalid_argument("P3Params: n must be even and positive");
        }
    }
    P2Params p2() const { return {n, true}; }
};

/// How Alice fills in the withheld bits when opening the other bit.
enum class WithheldStrategy : uint8_t {
    Keep,     // announce the bits she measured
    Reguess,  // fresh random bits
};

struct P3Commitment {
    detail::P2Session session;
    std::vector<QubitRef> bob_home;  // Bob's halves of the singlet pairs
    std::optional<EvidenceString> evidence;  // M1 || M2
    std::vector<int> withheld;       // second half of M
};

struct P3Outcome {
    bool check_passed = false;
    Verdict verdict;
    Verdict p2_part;  // verdict of the BB84 part alone
};

/// Commit phase of P3. The P2 steps use exactly the streams a P2 run with
/// the same seed uses.
inline void p3_commit(P3Commitment &c, const P3Params &params, int a, const Rng &rng, MessageLog *log = nullptr) {
    params.validate();
    const int half = params.n / 2;
    std::vector<QubitRef> alice_halves;
    for (int j = 0; j < half; ++j) {
        const auto [home, away] = c.session.pool.add_pair(bell_pair());
        c.bob_home.push_back(home);
        alice_halves.push_back(away);
    }
    detail::p2_commit_steps(c.session, params.p2(), a, rng, BobTamper::None, log);
    if (!c.session.check.passed) {
        return;
    }
    const std::vector<int> &m = c.session.m->bits();
    Rng singlets = rng.child("alice.singlets");
    std::vector<int> bits(m.begin(), m.begin() + half);
    for (int j = 0; j < half; ++j) {
        const Basis b = m[half + j] == 0 ? Basis::Z : Basis::X;
        bits.push_back(c.session.pool.measure(alice_halves[j], b, singlets));
    }
    c.withheld.assign(m.begin() + half, m.end());
    c.evidence.emplace(std::move(bits), static_cast<size_t>(half));
    log_message(log, "alice", "C6", {{"M1", bits_to_string(c.evidence->m1())}, {"M2", bits_to_string(c.evidence->m2())}});
}

/// Bob's checks: the P2 rule on M1 || withheld, then each home half measured
/// in the basis its withheld bit names must reproduce M2.
inline P3Outcome p3_verify(P3Commitment &c, int a, const std::vector<Bb84State> &record,
                           const std::vector<int> &withheld, const Rng &rng, bool check_certificate = true,
                           MessageLog *log = nullptr) {
    const EvidenceString &ev = *c.evidence;
    const size_t half = ev.m1().size();
    if (withheld.size() != half) {
        return {true, Verdict::reject(FailureReason::Malformed), Verdict::reject(FailureReason::Malformed)};
    }
    std::vector<int> m = ev.m1();
    m.insert(m.end(), withheld.begin(), withheld.end());
    const Verdict p2 = p2_bob_verify(a, record, m, c.session.bob, c.session.check.survivor_positions);
    Rng home = rng.child("bob.certificate");
    std::vector<int> home_outcomes;
    Verdict cert = Verdict::accept();
    const std::vector<int> m2 = ev.m2();
    for (size_t j = 0; j < half; ++j) {
        const Basis b = withheld[j] == 0 ? Basis::Z : Basis::X;
        home_outcomes.push_back(c.session.pool.measure(c.bob_home[j], b, home));
        if (home_outcomes.back() != m2[j]) {
            cert = Verdict::reject(FailureReason::CertificateMismatch);
        }
    }
    log_message(log, "bob", "U3-home", {{"outcomes", bits_to_string(home_outcomes)}});
    Verdict v = p2;
    if (v.accepted() && check_certificate) {
        v = cert;
    }
    log_message(log, "bob", "U3", {{"accepted", v.accepted()}, {"reason", to_string(v.reason)}});
    return {true, v, p2};
}

/// Commits to `commit_bit`, opens as `open_bit`.
inline P3Outcome p3_run(const P3Params &params, int commit_bit, int open_bit, const Rng &rng,
                        MessageLog *log = nullptr, WithheldStrategy strategy = WithheldStrategy::Keep,
                        bool check_certificate = true) {
    P3Commitment c;
    p3_commit(c, params, commit_bit, rng, log);
    if (!c.session.check.passed) {
        log_message(log, "alice", "abort", {{"reason", "check_failed"}});
        return {false, Verdict::reject(FailureReason::Malformed), Verdict::reject(FailureReason::Malformed)};
    }
    std::vector<int> withheld = c.withheld;
    if (open_bit != commit_bit && strategy == WithheldStrategy::Reguess) {
        Rng guess = rng.child("alice.reguess");
        for (int &b : withheld) {
            b = guess.bit() ? 1 : 0;
        }
    }
    log_message(log, "bob", "R", bob_record_json(c.session.bob, c.session.check.survivor_positions));
    log_message(log, "alice", "U1",
                {{"a", open_bit}, {"record", states_to_json(c.session.record)}, {"withheld", bits_to_string(withheld)}});
    return p3_verify(c, open_bit, c.session.record, withheld, rng, check_certificate, log);
}

/// Pass frequency of the best certificate for claim `b` after committing
/// to `a`. For b != a the best is to keep the measured withheld bits, which
/// always matches M2, leaving only the P2 part at risk.
///
/// With `premeasured = false` Alice has not measured anything yet when the
/// claim is chosen, so she simply commits to b then.
inline double p3_estimate_pstar(const P3Params &params, int a, int b, int trials, uint64_t seed,
                                bool premeasured = true) {
    if (trials < 1) {
        throw std::invalid_argument("p3_estimate_pstar: trials must be positive");
    }
    int pass = 0;
    for (int i = 0; i < trials; ++i) {
        const Rng rng(trial_seed(seed, static_cast<uint64_t>(i)));
        const int committed = premeasured ? a : b;
        pass += p3_run(params, committed, b, rng, nullptr, WithheldStrategy::Keep).verdict.accepted() ? 1 : 0;
    }
    return pass / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Hiding: what Bob's view says about the committed bit.

/// Plug-in mutual information (bits) of a joint count table indexed
/// [x][y].
inline double plugin_mutual_information(const std::vector<std::vector<double>> &counts) {
    double total = 0;
    std::vector<double> px(counts.size(), 0.0);
    std::vector<double> py(counts.empty() ? 0 : counts.front().size(), 0.0);
    for (size_t x = 0; x < counts.size(); ++x) {
        for (size_t y = 0; y < counts[x].size(); ++y) {
            px[x] += counts[x][y];
            py[y] += counts[x][y];
            total += counts[x][y];
        }
    }
    if (total <= 0) {
        return 0;
    }
    double mi = 0;
    for (size_t x = 0; x < counts.size(); ++x) {
        for (size_t y = 0; y < counts[x].size(); ++y) {
            const double c = counts[x][y];
            if (c > 0) {
                mi += c / total * std::log2(c * total / (px[x] * py[y]));
            }
        }
    }
    return std::max(mi, 0.0);
}

struct HidingEstimate {
    double per_position = 0;  // a vs (M_j, basis op, pad) at each position
    double weight = 0;        // a vs Hamming weight of M
    double max() const { return std::max(per_position, weight); }
};

/// Honest P2 commitments to a uniform bit, seen from Bob's side.
inline HidingEstimate p2_hiding_estimate(const P2Params &params, int trials, uint64_t seed) {
    std::vector<std::vector<double>> per_pos(2, std::vector<double>(16, 0.0));
    std::vector<std::vector<double>> weight(2, std::vector<double>(static_cast<size_t>(params.n) + 1, 0.0));
    for (int i = 0; i < trials; ++i) {
        const Rng rng(trial_seed(seed, static_cast<uint64_t>(i)));
        Rng coin = rng.child("alice.bit");
        const int a = coin.bit() ? 1 : 0;
        detail::P2Session s;
        detail::p2_commit_steps(s, params, a, rng, BobTamper::None, nullptr);
        const std::vector<int> &m = s.m->bits();
        const Permutation inv = s.bob.perm.inverse();
        int w = 0;
        for (size_t j = 0; j < m.size(); ++j) {
            const Action &act = s.bob.actions[inv(s.check.survivor_positions[j])];
            const size_t sym = static_cast<size_t>(m[j]) * 8 + (act.hadamard ? 4 : 0) + (act.pad.x ? 2 : 0) +
                               (act.pad.z ? 1 : 0);
            per_pos[a][sym] += 1;
            w += m[j];
        }
        weight[a][static_cast<size_t>(w)] += 1;
    }
    return {plugin_mutual_information(per_pos), plugin_mutual_information(weight)};
}

}  // namespace qbc

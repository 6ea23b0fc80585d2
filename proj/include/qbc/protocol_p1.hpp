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

// Decoy-based commitment with single-blind commit states.
//
// Bob sends two sets of n random BB84 states plus Q extra states. Alice
// one-time-pads the extras into decoys, hides the set for her bit among
// them, shuffles, and returns the n+Q qubits as evidence, keeping the other
// set. To open she announces the bit, shuffle, pad key and commit positions
// and hands back the kept set; Bob checks all three groups projectively.
//
// Layout convention: before shuffling, the commit states occupy the sorted
// slots W0 in order and the decoys fill the remaining slots in order. The
// shuffle sends slot i to evidence position perm(i), and the announced W is
// perm applied to W0.

#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qbc/evidence.hpp"
#include "qbc/protocol_common.hpp"
#include "qbc/qubit_pool.hpp"
#include "qbc/steering.hpp"

namespace qbc {

struct P1Params {
    int n = 1;
    int Q = 1;
    bool memoryless = false;
    // Extras are sent as halves of |Phi+>; Bob measures his halves at verify.
    bool bell_extras = false;

    int evidence_size() const { return n + Q; }

    void validate() const {
        if (n < 1 || Q < n) {
            throw std::invalid_argument("P1Params: need 1 <= n <= Q");
        }
        if (memoryless && bell_extras) {
            throw std::invalid_argument("P1Params: Bell-half extras are not supported in the memoryless variant");
        }
    }
};

struct P1BobSecrets {
    std::vector<Bb84State> states0;
    std::vector<Bb84State> states1;
    // With Bell-half extras these are only fixed once the home halves are measured.
    std::vector<Bb84State> extras;
    std::vector<QubitRef> home;

    // Memoryless variant: Bob's measurement of every evidence position.
    std::vector<Basis> early_basis;
    std::vector<int> early_outcome;

    const std::vector<Bb84State> &states(int a) const { return a == 0 ? states0 : states1; }
};

/// The qubits Bob hands over in the first message, by label.
struct P1Delivery {
    std::vector<QubitRef> set0;
    std::vector<QubitRef> set1;
    std::vector<QubitRef> extras;

    const std::vector<QubitRef> &set(int a) const { return a == 0 ? set0 : set1; }
};

struct P1Opening {
    int a = 0;
    Permutation perm;
    PauliKey key;
    std::vector<int> W;
    std::vector<QubitRef> returned_noncommit;
};

/// Alice's private record between commit and unveil.
struct P1AliceState {
    int a = 0;
    Permutation perm;
    PauliKey key;
    std::vector<int> W;
    std::vector<QubitRef> kept;

    P1Opening open() const { return {a, perm, key, W, kept}; }
};

/// Test hooks for the commit step.
struct P1CommitHooks {
    std::optional<Permutation> perm;
    std::optional<std::vector<int>> insert_slots;  // W0, sorted
};

inline std::pair<P1BobSecrets, P1Delivery> p1_bob_prepare_forced(const P1Params &params,
                                                                  std::vector<Bb84State> states0,
                                                                  std::vector<Bb84State> states1,
                                                                  std::vector<Bb84State> extras, QubitPool &pool) {
    params.validate();
    if (static_cast<int>(states0.size()) != params.n || static_cast<int>(states1.size()) != params.n ||
        static_cast<int>(extras.size()) != params.Q) {
        throw std::invalid_argument("p1_bob_prepare_forced: set sizes do not match parameters");
    }
    P1BobSecrets secrets{std::move(states0), std::move(states1), std::move(extras), {}, {}, {}};
    P1Delivery out;
    for (int j = 0; j < params.n; ++j) {
        out.set0.push_back(pool.add(prepare_bb84(secrets.states0[j])));
    }
    for (int j = 0; j < params.n; ++j) {
        out.set1.push_back(pool.add(prepare_bb84(secrets.states1[j])));
    }
    for (int k = 0; k < params.Q; ++k) {
        out.extras.push_back(pool.add(prepare_bb84(secrets.extras[k])));
    }
    return {std::move(secrets), std::move(out)};
}

inline std::pair<P1BobSecrets, P1Delivery> p1_bob_prepare(const P1Params &params, QubitPool &pool, Rng &rng,
                                                          MessageLog *log = nullptr) {
    params.validate();
    std::vector<Bb84State> s0, s1, ex;
    for (int j = 0; j < params.n; ++j) {
        s0.push_back(Bb84State::random(rng));
    }
    for (int j = 0; j < params.n; ++j) {
        s1.push_back(Bb84State::random(rng));
    }
    if (!params.bell_extras) {
        for (int k = 0; k < params.Q; ++k) {
            ex.push_back(Bb84State::random(rng));
        }
    }
    auto [secrets, out] = params.bell_extras
                              ? p1_bob_prepare_forced(params, s0, s1, std::vector<Bb84State>(params.Q), pool)
                              : p1_bob_prepare_forced(params, s0, s1, ex, pool);
    if (params.bell_extras) {
        // Replace the placeholder extras with halves of |Phi+>.
        out.extras.clear();
        for (int k = 0; k < params.Q; ++k) {
            const auto [home, away] = pool.add_pair(bell_pair());
            secrets.home.push_back(home);
            out.extras.push_back(away);
        }
    }
    log_message(log, "bob", "C1", {{"set0", params.n}, {"set1", params.n}, {"extras", params.Q}});
    return {std::move(secrets), std::move(out)};
}

namespace detail {

/// Pre-shuffle slots not in W0, in order: slot of decoy k.
inline std::vector<int> decoy_slots(int total, const std::vector<int> &w0) {
    std::vector<char> used(total, 0);
    for (int s : w0) {
        used[s] = 1;
    }
    std::vector<int> out;
    for (int s = 0; s < total; ++s) {
        if (!used[s]) {
            out.push_back(s);
        }
    }
    return out;
}

/// Lays out pre-shuffle slots and applies the shuffle.
inline std::vector<QubitRef> shuffle_evidence(const std::vector<QubitRef> &pre, const Permutation &perm) {
    std::vector<QubitRef> evidence(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) {
        evidence[perm(static_cast<int>(i))] = pre[i];
    }
    return evidence;
}

inline std::vector<int> image_of(const Permutation &perm, const std::vector<int> &slots) {
    std::vector<int> out;
    for (int s : slots) {
        out.push_back(perm(s));
    }
    return out;
}

}  // namespace detail

/// Honest commit: pad the extras into decoys, insert set a at W0, shuffle.
inline std::pair<P1AliceState, std::vector<QubitRef>> p1_alice_commit(const P1Params &params, int a,
                                                                      const P1Delivery &in, QubitPool &pool,
                                                                      Rng &rng, const P1CommitHooks &hooks = {},
                                                                      MessageLog *log = nullptr) {
    params.validate();
    if (a != 0 && a != 1) {
        throw std::invalid_argument("p1_alice_commit: bit must be 0 or 1");
    }
    const int total = params.evidence_size();
    P1AliceState st;
    st.a = a;
    st.key = PauliKey::random(static_cast<size_t>(params.Q), rng);
    for (int k = 0; k < params.Q; ++k) {
        pool.apply_pauli(in.extras[k], st.key.bits[k]);
    }
    const std::vector<int> w0 = hooks.insert_slots ? *hooks.insert_slots : random_subset(total, params.n, rng);
    st.perm = hooks.perm ? *hooks.perm : Permutation::random(total, rng);
    if (st.perm.size() != total || !st.perm.is_bijection() || static_cast<int>(w0.size()) != params.n) {
        throw std::invalid_argument("p1_alice_commit: hook sizes do not match parameters");
    }

    std::vector<QubitRef> pre(total);
    const std::vector<int> dslots = detail::decoy_slots(total, w0);
    for (int j = 0; j < params.n; ++j) {
        pre[w0[j]] = in.set(a)[j];
    }
    for (int k = 0; k < params.Q; ++k) {
        pre[dslots[k]] = in.extras[k];
    }
    st.W = detail::image_of(st.perm, w0);
    st.kept = in.set(1 - a);
    std::vector<QubitRef> evidence = detail::shuffle_evidence(pre, st.perm);
    log_message(log, "alice", "C3", {{"evidence_qubits", total}});
    return {std::move(st), std::move(evidence)};
}

/// Memoryless variant: Bob measures each evidence qubit in a random basis
/// as soon as the commit phase ends.
inline void p1_bob_receive(const P1Params &params, P1BobSecrets &secrets, const std::vector<QubitRef> &evidence,
                           QubitPool &pool, Rng &rng) {
    if (!params.memoryless) {
        return;
    }
    secrets.early_basis.clear();
    secrets.early_outcome.clear();
    for (QubitRef q : evidence) {
        const Basis b = rng.bit() ? Basis::X : Basis::Z;
        secrets.early_basis.push_back(b);
        secrets.early_outcome.push_back(pool.measure(q, b, rng));
    }
}

/// State a decoy should be in after padding `extra` with `k`.
inline Bb84State padded_state(Bb84State extra, PauliBits k) {
    const bool flip = extra.basis == Basis::Z ? k.x : k.z;
    return {extra.basis, extra.bit ^ static_cast<int>(flip)};
}

inline Verdict p1_bob_verify(const P1Params &params, const std::vector<QubitRef> &evidence, const P1Opening &op,
                             P1BobSecrets &secrets, QubitPool &pool, Rng &rng, MessageLog *log = nullptr) {
    const int total = params.evidence_size();
    log_message(log, "alice", "U1",
                {{"a", op.a}, {"perm", op.perm.image}, {"key", key_to_json(op.key)}, {"W", op.W},
                 {"returned", op.returned_noncommit.size()}});
    auto done = [&](Verdict v) {
        log_message(log, "bob", "U2", {{"accepted", v.accepted()}, {"reason", to_string(v.reason)}});
        return v;
    };
    const auto malformed = Verdict::reject(FailureReason::CommitMismatch);
    if ((op.a != 0 && op.a != 1) || static_cast<int>(evidence.size()) != total || op.perm.size() != total ||
        !op.perm.is_bijection() || static_cast<int>(op.key.size()) != params.Q ||
        static_cast<int>(op.W.size()) != params.n || static_cast<int>(op.returned_noncommit.size()) != params.n) {
        return done(malformed);
    }
    // W must be the shuffled image of increasing slots.
    const Permutation inv = op.perm.inverse();
    std::vector<int> w0;
    for (int p : op.W) {
        if (p < 0 || p >= total) {
            return done(malformed);
        }
        w0.push_back(inv(p));
    }
    for (size_t j = 1; j < w0.size(); ++j) {
        if (w0[j] <= w0[j - 1]) {
            return done(malformed);
        }
    }

    auto passes = [&](int position, Bb84State expected) {
        if (!params.memoryless) {
            return pool.check(evidence[position], expected, rng);
        }
        return secrets.early_basis[position] != expected.basis || secrets.early_outcome[position] == expected.bit;
    };

    const auto &commit = secrets.states(op.a);
    for (int j = 0; j < params.n; ++j) {
        if (!passes(op.W[j], commit[j])) {
            return done(Verdict::reject(FailureReason::CommitMismatch));
        }
    }
    const auto &noncommit = secrets.states(1 - op.a);
    for (int j = 0; j < params.n; ++j) {
        if (!pool.check(op.returned_noncommit[j], noncommit[j], rng)) {
            return done(Verdict::reject(FailureReason::NonCommitMismatch));
        }
    }
    if (params.bell_extras) {
        for (int k = 0; k < params.Q; ++k) {
            const Basis b = rng.bit() ? Basis::X : Basis::Z;
            secrets.extras[k] = {b, pool.measure(secrets.home[k], b, rng)};
        }
    }
    const std::vector<int> dslots = detail::decoy_slots(total, w0);
    for (int k = 0; k < params.Q; ++k) {
        const int position = op.perm(dslots[k]);
        bool ok;
        if (params.memoryless) {
            ok = passes(position, padded_state(secrets.extras[k], op.key.bits[k]));
        } else {
            pool.apply_pauli(evidence[position], op.key.bits[k]);
            ok = pool.check(evidence[position], secrets.extras[k], rng);
        }
        if (!ok) {
            return done(Verdict::reject(FailureReason::DecoyMismatch));
        }
    }
    return done(Verdict::accept());
}

// ---------------------------------------------------------------------------
// Whole runs. Each draws from labelled child streams of `rng` so the parties'
// randomness does not shift when another step changes.

struct P1Outcome {
    int unveiled = 0;
    Verdict verdict;
};

struct P1ForcedStates {
    std::vector<Bb84State> states0;
    std::vector<Bb84State> states1;
    std::vector<Bb84State> extras;
};

namespace detail {

inline std::pair<P1BobSecrets, P1Delivery> p1_prepare(const P1Params &params, QubitPool &pool, const Rng &rng,
                                                      const P1ForcedStates *forced, MessageLog *log) {
    Rng bob = rng.child("bob.prepare");
    if (forced) {
        auto r = p1_bob_prepare_forced(params, forced->states0, forced->states1, forced->extras, pool);
        log_message(log, "bob", "C1", {{"set0", params.n}, {"set1", params.n}, {"extras", params.Q}});
        return r;
    }
    return p1_bob_prepare(params, pool, bob, log);
}

}  // namespace detail

inline P1Outcome p1_run_honest(const P1Params &params, int a, const Rng &rng, MessageLog *log = nullptr,
                               const P1ForcedStates *forced = nullptr) {
    QubitPool pool;
    auto [secrets, delivery] = detail::p1_prepare(params, pool, rng, forced, log);
    Rng alice = rng.child("alice.commit");
    auto [st, evidence] = p1_alice_commit(params, a, delivery, pool, alice, {}, log);
    Rng recv = rng.child("bob.receive");
    p1_bob_receive(params, secrets, evidence, pool, recv);
    Rng verify = rng.child("bob.verify");
    return {a, p1_bob_verify(params, evidence, st.open(), secrets, pool, verify, log)};
}

/// Commits honestly to the other bit, then opens as `target_bit` with the
/// same shuffle, key and positions, returning the kept set as non-commit.
inline Verdict p1_attack_naive_flip(const P1Params &params, int target_bit, const Rng &rng, MessageLog *log = nullptr,
                                    const P1ForcedStates *forced = nullptr) {
    QubitPool pool;
    auto [secrets, delivery] = detail::p1_prepare(params, pool, rng, forced, log);
    Rng alice = rng.child("alice.commit");
    auto [st, evidence] = p1_alice_commit(params, 1 - target_bit, delivery, pool, alice, {}, log);
    Rng recv = rng.child("bob.receive");
    p1_bob_receive(params, secrets, evidence, pool, recv);
    P1Opening op = st.open();
    op.a = target_bit;
    Rng verify = rng.child("bob.verify");
    return p1_bob_verify(params, evidence, op, secrets, pool, verify, log);
}

/// Puts both sets into the evidence, displacing n decoys, and keeps the n
/// displaced extras to hand back as the "non-commit" set.
///
/// Pre-shuffle layout: set 0 in slots [0, n), set 1 in [n, 2n), decoys for
/// extras n..Q-1 after that. For either target the displaced set then sits
/// at decoy indices 0..n-1, so the true decoys keep consistent indices. The
/// key for the displaced slots is zero, which maximizes the chance that an
/// unpadded commit state passes as extra k.
inline Verdict p1_attack_both_insert(const P1Params &params, int target_bit, const Rng &rng,
                                     MessageLog *log = nullptr) {
    params.validate();
    QubitPool pool;
    auto [secrets, delivery] = detail::p1_prepare(params, pool, rng, nullptr, log);
    Rng alice = rng.child("alice.commit");
    const int n = params.n;
    const int total = params.evidence_size();
    PauliKey key = PauliKey::random(static_cast<size_t>(params.Q), alice);
    for (int k = 0; k < n; ++k) {
        key.bits[k] = {};
    }
    std::vector<QubitRef> pre(total);
    for (int j = 0; j < n; ++j) {
        pre[j] = delivery.set0[j];
        pre[n + j] = delivery.set1[j];
    }
    for (int k = n; k < params.Q; ++k) {
        pool.apply_pauli(delivery.extras[k], key.bits[k]);
        pre[n + k] = delivery.extras[k];
    }
    const Permutation perm = Permutation::random(total, alice);
    const std::vector<QubitRef> evidence = detail::shuffle_evidence(pre, perm);
    log_message(log, "alice", "C3", {{"evidence_qubits", total}});

    Rng recv = rng.child("bob.receive");
    p1_bob_receive(params, secrets, evidence, pool, recv);

    std::vector<int> w0;
    for (int j = 0; j < n; ++j) {
        w0.push_back(target_bit == 0 ? j : n + j);
    }
    P1Opening op;
    op.a = target_bit;
    op.perm = perm;
    op.key = key;
    op.W = detail::image_of(perm, w0);
    op.returned_noncommit.assign(delivery.extras.begin(), delivery.extras.begin() + n);
    Rng verify = rng.child("bob.verify");
    return p1_bob_verify(params, evidence, op, secrets, pool, verify, log);
}

/// The committed bit is held in superposition until just before unveiling.
///
/// Both branches hand Bob identically distributed evidence, so measuring the
/// auxiliary first and then running the chosen branch honestly produces the
/// same joint statistics as the entangled version.
inline P1Outcome p1_attack_superposition(const P1Params &params, double gamma0_sq, const Rng &rng,
                                         MessageLog *log = nullptr) {
    if (!(gamma0_sq >= 0.0 && gamma0_sq <= 1.0)) {
        throw std::invalid_argument("p1_attack_superposition: gamma0_sq must be in [0, 1]");
    }
    Rng aux = rng.child("alice.auxiliary");
    const int a = aux.uniform() < gamma0_sq ? 0 : 1;
    return p1_run_honest(params, a, rng, log);
}

// ---------------------------------------------------------------------------
// Receiver-side density of the evidence.

inline std::vector<Register> prepared(const std::vector<Bb84State> &states) {
    std::vector<Register> out;
    for (const auto &s : states) {
        out.push_back(prepare_bb84(s));
    }
    return out;
}

/// Bob's density matrix of the evidence before the unveil, given his own
/// preparations. Dense, so only for n+Q up to kDenseEvidenceLimit.
inline DensityMatrix p1_evidence_density(const P1Params &params, int a, const P1BobSecrets &secrets) {
    return SymmetricEvidence(prepared(secrets.states(a)), params.evidence_size()).dense();
}

/// Fidelity between the two possible evidence states, block-wise.
inline double p1_evidence_fidelity(const P1Params &params, const P1BobSecrets &secrets) {
    const int total = params.evidence_size();
    return block_fidelity(SymmetricEvidence(prepared(secrets.states0), total).blocks(),
                          SymmetricEvidence(prepared(secrets.states1), total).blocks());
}

/// One commit qubit under a uniformly random Pauli pad: the ensemble Alice
/// would have to steer within if the decoys hid it perfectly.
inline Ensemble p1_padded_ensemble(Bb84State commit) {
    std::vector<EnsembleMember> members;
    const Register base = prepare_bb84(commit);
    for (PauliBits p : PauliBits::all()) {
        members.push_back({0.25, pauli_encrypt(base, PauliKey{{p}})});
    }
    return Ensemble(std::move(members));
}

}  // namespace qbc

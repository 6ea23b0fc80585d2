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

// Seeded Monte Carlo experiments over the protocols.
//
// Trial i runs on Rng(trial_seed(seed, i)) and its result lands in slot i,
// so output does not depend on the worker count or scheduling.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qbc/analysis.hpp"
#include "qbc/protocol_p1.hpp"
#include "qbc/protocol_p2p3.hpp"
#include "qbc/steering.hpp"

namespace qbc {

/// Invalid experiment configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Output could not be written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Protocol : uint8_t { P1, P2, P3 };
enum class Attack : uint8_t { NaiveFlip, BothInsert, Superposition, WrongBasis, BellNoScramble };

inline const char *to_string(Protocol p) {
    switch (p) {
        case Protocol::P1:
            return "p1";
        case Protocol::P2:
            return "p2";
        case Protocol::P3:
            return "p3";
    }
    return "?";
}

inline const char *to_string(Attack a) {
    switch (a) {
        case Attack::NaiveFlip:
            return "naive_flip";
        case Attack::BothInsert:
            return "both_insert";
        case Attack::Superposition:
            return "superposition";
        case Attack::WrongBasis:
            return "wrong_basis";
        case Attack::BellNoScramble:
            return "bell_no_scramble";
    }
    return "?";
}

inline Protocol protocol_from_string(const std::string &s) {
    for (Protocol p : {Protocol::P1, Protocol::P2, Protocol::P3}) {
        if (s == to_string(p)) {
            return p;
        }
    }
    throw ConfigError("unknown protocol: " + s);
}

inline Attack attack_from_string(const std::string &s) {
    for (Attack a : {Attack::NaiveFlip, Attack::BothInsert, Attack::Superposition, Attack::WrongBasis,
                     Attack::BellNoScramble}) {
        if (s == to_string(a)) {
            return a;
        }
    }
    throw ConfigError("unknown attack: " + s);
}

struct ExperimentConfig {
    Protocol protocol = Protocol::P2;
    std::optional<Attack> attack;
    int n = 8;
    int Q = 16;
    int trials = 1000;
    uint64_t seed = 1;
    std::optional<double> gamma0_sq;
    bool memoryless = false;
    bool scramble = true;  // Bob's shuffle in P2/P3
    int bit = 0;           // bit Alice opens; flip attacks commit to the other one
    std::string output_path;
    std::string transcripts_path;

    void validate() const {
        if (trials < 1) {
            throw ConfigError("trials must be positive");
        }
        if (bit != 0 && bit != 1) {
            throw ConfigError("bit must be 0 or 1");
        }
        if (gamma0_sq.has_value() != (attack == Attack::Superposition)) {
            throw ConfigError("gamma0_sq is required by, and only by, the superposition attack");
        }
        if (gamma0_sq && !(*gamma0_sq >= 0.0 && *gamma0_sq <= 1.0)) {
            throw ConfigError("gamma0_sq must be in [0, 1]");
        }
        if (memoryless && protocol != Protocol::P1) {
            throw ConfigError("memoryless applies to p1 only");
        }
        try {
            switch (protocol) {
                case Protocol::P1:
                    if (attack && *attack != Attack::NaiveFlip && *attack != Attack::BothInsert &&
                        *attack != Attack::Superposition) {
                        throw ConfigError(std::string("attack ") + to_string(*attack) + " does not apply to p1");
                    }
                    P1Params{n, Q, memoryless, false}.validate();
                    break;
                case Protocol::P2:
                    if (attack && *attack != Attack::WrongBasis && *attack != Attack::BellNoScramble) {
                        throw ConfigError(std::string("attack ") + to_string(*attack) + " does not apply to p2");
                    }
                    P2Params{n, scramble}.validate();
                    break;
                case Protocol::P3:
                    if (attack && *attack != Attack::WrongBasis) {
                        throw ConfigError(std::string("attack ") + to_string(*attack) + " does not apply to p3");
                    }
                    if (!scramble) {
                        throw ConfigError("p3 always shuffles");
                    }
                    P3Params{n}.validate();
                    break;
            }
        } catch (const ConfigError &) {
            throw;
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j = {{"protocol", to_string(protocol)},
                            {"attack", attack ? to_string(*attack) : "none"},
                            {"n", n},
                            {"trials", trials},
                            {"seed", seed},
                            {"bit", bit}};
        if (protocol == Protocol::P1) {
            j["Q"] = Q;
            j["memoryless"] = memoryless;
        } else {
            j["scramble"] = scramble;
        }
        if (gamma0_sq) {
            j["gamma0_sq"] = *gamma0_sq;
        }
        return j;
    }
};

struct TrialStats {
    int trials = 0;
    int accept_count = 0;
    int abort_count = 0;  // runs stopped by the check phase before any unveil
    std::array<int, 2> unveil_counts{0, 0};

    double rate() const { return trials == 0 ? 0.0 : accept_count / static_cast<double>(trials); }
    double standard_error() const { return trials == 0 ? 0.0 : std::sqrt(rate() * (1 - rate()) / trials); }
    double unveil_frequency(int b) const {
        const int total = unveil_counts[0] + unveil_counts[1];
        return total == 0 ? 0.0 : unveil_counts[b] / static_cast<double>(total);
    }

    nlohmann::json to_json() const {
        return {{"trials", trials},         {"accepted", accept_count},   {"aborted", abort_count},
                {"unveiled", unveil_counts}, {"rate", rate()},             {"stderr", standard_error()}};
    }
};

struct TrialResult {
    bool accepted = false;
    bool aborted = false;
    int unveiled = 0;
    Verdict verdict;
    MessageLog log;
};

/// One run of the configured protocol on trial generator `rng`.
inline TrialResult run_trial(const ExperimentConfig &c, const Rng &rng, bool keep_log) {
    TrialResult r;
    MessageLog *log = keep_log ? &r.log : nullptr;
    const auto finish = [&](Verdict v, int unveiled) {
        r.verdict = v;
        r.accepted = v.accepted();
        r.unveiled = unveiled;
    };
    switch (c.protocol) {
        case Protocol::P1: {
            const P1Params params{c.n, c.Q, c.memoryless, false};
            if (!c.attack) {
                const P1Outcome o = p1_run_honest(params, c.bit, rng, log);
                finish(o.verdict, o.unveiled);
            } else if (*c.attack == Attack::NaiveFlip) {
                finish(p1_attack_naive_flip(params, c.bit, rng, log), c.bit);
            } else if (*c.attack == Attack::BothInsert) {
                finish(p1_attack_both_insert(params, c.bit, rng, log), c.bit);
            } else {
                const P1Outcome o = p1_attack_superposition(params, *c.gamma0_sq, rng, log);
                finish(o.verdict, o.unveiled);
            }
            break;
        }
        case Protocol::P2: {
            const P2Params params{c.n, c.scramble};
            if (c.attack == Attack::BellNoScramble) {
                finish(p2_attack_bell(params, c.bit, rng, log), c.bit);
                break;
            }
            const int commit = c.attack == Attack::WrongBasis ? 1 - c.bit : c.bit;
            const P2Outcome o = p2_run(params, commit, c.bit, rng, log);
            r.aborted = !o.check_passed;
            finish(o.verdict, c.bit);
            break;
        }
        case Protocol::P3: {
            const int commit = c.attack == Attack::WrongBasis ? 1 - c.bit : c.bit;
            const P3Outcome o = p3_run({c.n}, commit, c.bit, rng, log);
            r.aborted = !o.check_passed;
            finish(o.verdict, c.bit);
            break;
        }
    }
    if (r.aborted) {
        r.accepted = false;
    }
    return r;
}

/// Worker count: QBC_LAB_THREADS if set and positive, else the hardware
/// concurrency.
inline unsigned worker_count() {
    if (const char *env = std::getenv("QBC_LAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on a pool of workers.
inline void parallel_for(int count, const std::function<void(int)> &fn, unsigned workers = worker_count()) {
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(count, 1)));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

struct ExperimentResult {
    TrialStats stats;
    std::vector<std::string> transcript_lines;  // one per trial, when requested
};

inline std::string transcript_line(int index, uint64_t seed, const TrialResult &r) {
    nlohmann::json j = {{"trial", index},
                        {"seed", seed},
                        {"messages", r.log.to_json()},
                        {"aborted", r.aborted},
                        {"accepted", r.accepted},
                        {"reason", to_string(r.verdict.reason)},
                        {"unveiled", r.unveiled}};
    return j.dump();
}

inline ExperimentResult run_experiment(const ExperimentConfig &c, unsigned workers = worker_count()) {
    c.validate();
    const bool keep = !c.transcripts_path.empty();
    std::vector<TrialResult> results(static_cast<size_t>(c.trials));
    parallel_for(
        c.trials,
        [&](int i) {
            results[static_cast<size_t>(i)] = run_trial(c, Rng(trial_seed(c.seed, static_cast<uint64_t>(i))), keep);
        },
        workers);
    ExperimentResult out;
    out.stats.trials = c.trials;
    for (size_t i = 0; i < results.size(); ++i) {
        const TrialResult &r = results[i];
        out.stats.accept_count += r.accepted;
        out.stats.abort_count += r.aborted;
        if (!r.aborted) {
            out.stats.unveil_counts[r.unveiled]++;
        }
        if (keep) {
            out.transcript_lines.push_back(
                transcript_line(static_cast<int>(i), trial_seed(c.seed, static_cast<uint64_t>(i)), r));
        }
    }
    return out;
}

inline std::string stats_line(const ExperimentConfig &c, const TrialStats &s) {
    nlohmann::json j = s.to_json();
    j["config"] = c.to_json();
    return j.dump();
}

inline void write_text(const std::string &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path + " for writing");
    }
    f << text;
    if (!f.flush()) {
        throw IoError("write to " + path + " failed");
    }
}

/// Stats line to output_path, transcripts (config line, then one line per
/// trial) to transcripts_path.
inline void write_experiment(const ExperimentConfig &c, const ExperimentResult &r) {
    if (!c.output_path.empty()) {
        write_text(c.output_path, stats_line(c, r.stats) + "\n");
    }
    if (!c.transcripts_path.empty()) {
        std::string text = nlohmann::json{{"config", c.to_json()}}.dump() + "\n";
        for (const auto &line : r.transcript_lines) {
            text += line;
            text += '\n';
        }
        write_text(c.transcripts_path, text);
    }
}

// ---------------------------------------------------------------------------
// Replay of P2/P3 verdicts from a transcript's classical messages.

namespace detail {

inline const nlohmann::json *find_message(const nlohmann::json &messages, const std::string &step,
                                          const std::string &field = "") {
    const nlohmann::json *found = nullptr;
    for (const auto &m : messages) {
        if (m.at("step") == step && (field.empty() || m.at("payload").contains(field))) {
            found = &m.at("payload");
        }
    }
    return found;
}

}  // namespace detail

/// Recomputes Bob's verdict for one P2 or P3 transcript line. Returns
/// nullopt for aborted runs, which have no unveil.
inline std::optional<Verdict> replay_verdict(const nlohmann::json &line) {
    if (line.at("aborted").get<bool>()) {
        return std::nullopt;
    }
    const auto &msgs = line.at("messages");
    const auto *r = detail::find_message(msgs, "R");
    const auto *u1 = detail::find_message(msgs, "U1");
    if (!r || !u1) {
        throw std::invalid_argument("replay_verdict: transcript lacks the unveil records");
    }
    BobRandomization bob;
    for (const auto &a : r->at("actions")) {
        bob.actions.push_back(Action::from_name(a.get<std::string>()));
    }
    bob.perm.image = r->at("perm").get<std::vector<int>>();
    const std::vector<int> survivors = r->at("survivors").get<std::vector<int>>();
    const int a = u1->at("a").get<int>();
    const std::vector<Bb84State> record = states_from_json(u1->at("record"));
    if (const auto *p2 = detail::find_message(msgs, "C6", "M")) {
        return p2_bob_verify(a, record, bits_from_string(p2->at("M").get<std::string>()), bob, survivors);
    }
    const auto *p3 = detail::find_message(msgs, "C6", "M1");
    const auto *home = detail::find_message(msgs, "U3-home");
    if (!p3 || !home) {
        throw std::invalid_argument("replay_verdict: transcript lacks the evidence records");
    }
    std::vector<int> m = bits_from_string(p3->at("M1").get<std::string>());
    const std::vector<int> withheld = bits_from_string(u1->at("withheld").get<std::string>());
    m.insert(m.end(), withheld.begin(), withheld.end());
    const Verdict v = p2_bob_verify(a, record, m, bob, survivors);
    if (!v.accepted()) {
        return v;
    }
    if (bits_from_string(home->at("outcomes").get<std::string>()) != bits_from_string(p3->at("M2").get<std::string>())) {
        return Verdict::reject(FailureReason::CertificateMismatch);
    }
    return Verdict::accept();
}

// ---------------------------------------------------------------------------
// Bounds table.

struct IntRange {
    int lo = 1;
    int hi = 1;

    /// Parses "a" or "a:b" (inclusive).
    static IntRange parse(const std::string &s) {
        try {
            const size_t colon = s.find(':');
            IntRange r;
            size_t used = 0;
            r.lo = std::stoi(s.substr(0, colon), &used);
            r.hi = colon == std::string::npos ? r.lo : std::stoi(s.substr(colon + 1));
            if (r.hi < r.lo) {
                throw ConfigError("range " + s + " is empty");
            }
            return r;
        } catch (const std::logic_error &) {
            throw ConfigError("bad range " + s + " (expected a or a:b)");
        }
    }
};

inline std::vector<BoundReport> bounds_table(IntRange n_range, IntRange q_range) {
    if (n_range.lo < 1 || q_range.lo < 1) {
        throw ConfigError("bounds ranges must start at 1 or above");
    }
    std::vector<BoundReport> rows;
    for (int n = n_range.lo; n <= n_range.hi; ++n) {
        for (int Q = q_range.lo; Q <= q_range.hi; ++Q) {
            if (Q < n) {
                continue;
            }
            if (n + Q <= kOracleEvidenceLimit) {
                rows.push_back(compare_with_mixture_oracle(Q, n, prepare_bb84(Basis::Z, 0)));
            } else {
                rows.push_back(bound_report(Q, n));
            }
        }
    }
    return rows;
}

inline std::string bounds_csv(const std::vector<BoundReport> &rows) {
    std::string out = std::string(BoundReport::csv_header()) + "\n";
    for (const auto &r : rows) {
        out += r.csv_row() + "\n";
    }
    return out;
}

inline std::vector<BoundReport> emit_bounds_table(IntRange n_range, IntRange q_range, const std::string &path) {
    auto rows = bounds_table(n_range, q_range);
    write_text(path, bounds_csv(rows));
    return rows;
}

// ---------------------------------------------------------------------------
// Steering demonstration against the toy concealing receiver.

struct EnsemblePair {
    Ensemble ens0;
    Ensemble ens1;
};

/// Built-in presets: "zx" (Z pair vs X pair), "remix" (random ensemble and
/// a unitary remix of it), "unequal" (densities differ on purpose).
inline EnsemblePair steering_preset(const std::string &name, uint64_t seed) {
    const auto pair_of = [](Basis b) {
        return Ensemble({{0.5, prepare_bb84(b, 0)}, {0.5, prepare_bb84(b, 1)}});
    };
    if (name == "zx") {
        return {pair_of(Basis::Z), pair_of(Basis::X)};
    }
    if (name == "remix") {
        Rng rng = Rng(seed).child("preset.remix");
        Ensemble ens0 = random_ensemble(3, 1, rng);
        Ensemble ens1 = remix_ensemble(ens0, rng);
        return {std::move(ens0), std::move(ens1)};
    }
    if (name == "unequal") {
        return {pair_of(Basis::Z), Ensemble({{1.0, prepare_bb84(Basis::Z, 0)}})};
    }
    throw ConfigError("unknown steering preset: " + name);
}

struct SteeringStats {
    std::string preset;
    double residual = 0;
    std::array<TrialStats, 2> per_bit;

    nlohmann::json to_json() const {
        return {{"preset", preset}, {"residual", residual}, {"bit0", per_bit[0].to_json()}, {"bit1", per_bit[1].to_json()}};
    }
};

/// Alice purifies ensemble 0, then opens either bit: bit 0 by measuring the
/// reference in its own labels, bit 1 by steering with the cheat unitary.
/// Throws DensitiesDiffer when the preset's densities do not match.
inline SteeringStats steering_demo(const std::string &preset, int trials, uint64_t seed,
                                   unsigned workers = worker_count()) {
    if (trials < 1) {
        throw ConfigError("trials must be positive");
    }
    const EnsemblePair pair = steering_preset(preset, seed);
    const CheatUnitary u = solve_cheat_unitary(pair.ens0, pair.ens1);
    const Purification purif = purify(pair.ens0);
    SteeringStats out{preset, u.residual(pair.ens0, pair.ens1), {}};
    for (int b = 0; b < 2; ++b) {
        const Ensemble &target = b == 0 ? pair.ens0 : pair.ens1;
        std::vector<char> accepted(static_cast<size_t>(trials), 0);
        parallel_for(
            trials,
            [&](int i) {
                Rng rng = Rng(trial_seed(seed, static_cast<uint64_t>(i))).child(b == 0 ? "steer.bit0" : "steer.bit1");
                const ReferenceOutcome o = steer_and_unveil(purif, u, b, rng);
                accepted[static_cast<size_t>(i)] = toy_receiver_accepts(target, o.index, o.evidence, rng);
            },
            workers);
        TrialStats &s = out.per_bit[b];
        s.trials = trials;
        for (char a : accepted) {
            s.accept_count += a;
        }
        s.unveil_counts[b] = trials;
    }
    return out;
}

}  // namespace qbc

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

// qbc_lab: run protocol experiments, print bound tables, demo steering.
//
// Exit codes: 0 success, 1 usage error, 2 --assert check failed, 3 I/O error.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qbc/qbc.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitAssert = 2;
constexpr int kExitIo = 3;

/// Within 3 binomial sigma of `expected` (exact match when expected is 0 or 1).
bool rate_matches(double rate, double expected, int trials) {
    const double sigma = std::sqrt(expected * (1 - expected) / trials);
    return std::abs(rate - expected) <= 3 * sigma + 1e-12;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum bit commitment simulation lab"};
    app.require_subcommand(1);

    qbc::ExperimentConfig cfg;
    std::string protocol = "p2";
    std::string attack = "none";
    std::optional<double> gamma0_sq;
    std::optional<double> assert_rate;

    CLI::App *run = app.add_subcommand("run", "Monte Carlo trials of one protocol configuration");
    run->add_option("--protocol", protocol, "p1, p2 or p3")->capture_default_str();
    run->add_option("--attack", attack,
                    "none, naive_flip, both_insert, superposition, wrong_basis or bell_no_scramble")
        ->capture_default_str();
    run->add_option("--n", cfg.n, "commit qubits (p1) or evidence bits (p2, p3)")->capture_default_str();
    run->add_option("--Q", cfg.Q, "decoy qubits (p1)")->capture_default_str();
    run->add_option("--trials", cfg.trials)->capture_default_str();
    run->add_option("--seed", cfg.seed)->capture_default_str();
    run->add_option("--bit", cfg.bit, "bit Alice opens")->capture_default_str();
    run->add_option("--gamma0-sq", gamma0_sq, "branch weight of bit 0 for the superposition attack");
    run->add_flag("--memoryless", cfg.memoryless, "p1 receiver measures the evidence on arrival");
    run->add_option("--scramble", cfg.scramble, "Bob shuffles returned qubits (p2)")->capture_default_str();
    run->add_option("--out", cfg.output_path, "stats JSON line");
    run->add_option("--transcripts", cfg.transcripts_path, "per-trial message logs, NDJSON");
    run->add_option("--assert", assert_rate, "exit 2 unless the acceptance rate is within 3 sigma of this value");

    std::string n_range = "1:4";
    std::string q_range = "1:24";
    std::string bounds_out;
    bool bounds_assert = false;
    CLI::App *bounds = app.add_subcommand("bounds", "fidelity bound, exact count and oracle table as CSV");
    bounds->add_option("--n", n_range, "a or a:b")->capture_default_str();
    bounds->add_option("--Q", q_range, "a or a:b")->capture_default_str();
    bounds->add_option("--out", bounds_out, "CSV path (stdout when omitted)");
    bounds->add_flag("--assert", bounds_assert, "exit 2 if any model or oracle fidelity is below the bound");

    std::string preset = "zx";
    int steer_trials = 10000;
    uint64_t steer_seed = 1;
    std::string steer_out;
    std::optional<double> steer_assert;
    CLI::App *steer = app.add_subcommand("steer", "steering attack against the toy concealing receiver");
    steer->add_option("--preset", preset, "zx, remix or unequal")->capture_default_str();
    steer->add_option("--trials", steer_trials)->capture_default_str();
    steer->add_option("--seed", steer_seed)->capture_default_str();
    steer->add_option("--out", steer_out, "stats JSON line");
    steer->add_option("--assert", steer_assert, "exit 2 unless both bits reach this acceptance rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) {
            cfg.protocol = qbc::protocol_from_string(protocol);
            if (attack != "none") {
                cfg.attack = qbc::attack_from_string(attack);
            }
            cfg.gamma0_sq = gamma0_sq;
            const qbc::ExperimentResult r = qbc::run_experiment(cfg);
            qbc::write_experiment(cfg, r);
            std::cout << qbc::stats_line(cfg, r.stats) << '\n';
            if (assert_rate && !rate_matches(r.stats.rate(), *assert_rate, cfg.trials)) {
                std::cerr << "assert failed: rate " << r.stats.rate() << " vs expected " << *assert_rate << '\n';
                return kExitAssert;
            }
            return 0;
        }
        if (*bounds) {
            const auto rows = qbc::bounds_table(qbc::IntRange::parse(n_range), qbc::IntRange::parse(q_range));
            const std::string csv = qbc::bounds_csv(rows);
            if (bounds_out.empty()) {
                std::cout << csv;
            } else {
                qbc::write_text(bounds_out, csv);
            }
            if (bounds_assert) {
                int below = 0;
                for (const auto &row : rows) {
                    if (!row.model_meets_bound() || !row.oracle_meets_bound()) {
                        std::cerr << "below bound: Q=" << row.Q << " n=" << row.n << '\n';
                        ++below;
                    }
                }
                if (below > 0) {
                    return kExitAssert;
                }
            }
            return 0;
        }
        const qbc::SteeringStats s = qbc::steering_demo(preset, steer_trials, steer_seed);
        const std::string line = s.to_json().dump();
        std::cout << line << '\n';
        if (!steer_out.empty()) {
            qbc::write_text(steer_out, line + "\n");
        }
        if (steer_assert && (s.per_bit[0].rate() < *steer_assert || s.per_bit[1].rate() < *steer_assert)) {
            std::cerr << "assert failed: acceptance below " << *steer_assert << '\n';
            return kExitAssert;
        }
        return 0;
    } catch (const qbc::IoError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const qbc::DensitiesDiffer &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qbc/qbc.hpp"
#include "stats_util.hpp"

namespace qbc {
namespace {

std::string read_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string temp_path(const std::string &name) {
    return (std::filesystem::temp_directory_path() / ("qbc_lab_test_" + name)).string();
}

ExperimentConfig p2_config(int n, int trials) {
    ExperimentConfig c;
    c.protocol = Protocol::P2;
    c.n = n;
    c.trials = trials;
    c.seed = 2026;
    return c;
}

TEST(config, validation) {
    ExperimentConfig c = p2_config(4, 10);
    EXPECT_NO_THROW(c.validate());
    c.attack = Attack::NaiveFlip;
    EXPECT_THROW(c.validate(), ConfigError);
    c.attack = Attack::Superposition;
    EXPECT_THROW(c.validate(), ConfigError);
    c.protocol = Protocol::P1;
    EXPECT_THROW(c.validate(), ConfigError);  // gamma0_sq missing
    c.gamma0_sq = 0.5;
    EXPECT_NO_THROW(c.validate());
    c.gamma0_sq = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c.attack.reset();
    c.gamma0_sq = 0.5;
    EXPECT_THROW(c.validate(), ConfigError);  // gamma0_sq without superposition
    c.gamma0_sq.reset();
    c.Q = 2;
    EXPECT_THROW(c.validate(), ConfigError);  // Q < n
    ExperimentConfig p3 = p2_config(3, 10);
    p3.protocol = Protocol::P3;
    EXPECT_THROW(p3.validate(), ConfigError);
    ExperimentConfig zero = p2_config(4, 0);
    EXPECT_THROW(zero.validate(), ConfigError);
    EXPECT_THROW(attack_from_string("teleport"), ConfigError);
    EXPECT_EQ(attack_from_string("bell_no_scramble"), Attack::BellNoScramble);
    EXPECT_EQ(protocol_from_string("p3"), Protocol::P3);
}

TEST(trial_stats, standard_error_is_binomial) {
    TrialStats s;
    s.trials = 400;
    s.accept_count = 100;
    EXPECT_DOUBLE_EQ(s.rate(), 0.25);
    EXPECT_DOUBLE_EQ(s.standard_error(), std::sqrt(0.25 * 0.75 / 400));
    s.unveil_counts = {300, 100};
    EXPECT_DOUBLE_EQ(s.unveil_frequency(1), 0.25);
}

TEST(run_experiment, p2_honest_is_complete) {
    const ExperimentResult r = run_experiment(p2_config(8, 1000));
    EXPECT_EQ(r.stats.accept_count, 1000);
    EXPECT_EQ(r.stats.rate(), 1.0);
    EXPECT_EQ(r.stats.standard_error(), 0.0);
}

TEST(run_experiment, p2_wrong_basis_matches_three_quarters_power) {
    ExperimentConfig c = p2_config(8, 10000);
    c.attack = Attack::WrongBasis;
    const ExperimentResult r = run_experiment(c);
    EXPECT_TRUE(qbc_test::within_sigma(r.stats.rate(), std::pow(0.75, 8), c.trials)) << r.stats.rate();
    EXPECT_EQ(r.stats.unveil_counts[0], c.trials);
}

TEST(run_experiment, independent_of_worker_count) {
    ExperimentConfig c = p2_config(4, 300);
    c.attack = Attack::WrongBasis;
    c.transcripts_path = "unused";
    const ExperimentResult one = run_experiment(c, 1);
    const ExperimentResult four = run_experiment(c, 4);
    EXPECT_EQ(one.stats.accept_count, four.stats.accept_count);
    EXPECT_EQ(one.transcript_lines, four.transcript_lines);
}

TEST(run_experiment, p1_superposition_splits_unveils) {
    ExperimentConfig c;
    c.protocol = Protocol::P1;
    c.attack = Attack::Superposition;
    c.gamma0_sq = 0.5;
    c.n = 2;
    c.Q = 4;
    c.trials = 2000;
    const ExperimentResult r = run_experiment(c);
    EXPECT_EQ(r.stats.rate(), 1.0);
    EXPECT_TRUE(qbc_test::within_sigma(r.stats.unveil_frequency(0), 0.5, c.trials));
}

TEST(run_experiment, p3_honest_runs_never_abort) {
    ExperimentConfig c = p2_config(4, 200);
    c.protocol = Protocol::P3;
    const ExperimentResult r = run_experiment(c);
    EXPECT_EQ(r.stats.abort_count, 0);
    EXPECT_EQ(r.stats.rate(), 1.0);
}

TEST(outputs, repeated_runs_are_byte_identical) {
    ExperimentConfig c = p2_config(4, 200);
    c.attack = Attack::WrongBasis;
    c.output_path = temp_path("stats_a.json");
    c.transcripts_path = temp_path("tr_a.ndjson");
    write_experiment(c, run_experiment(c, 3));
    ExperimentConfig d = c;
    d.output_path = temp_path("stats_b.json");
    d.transcripts_path = temp_path("tr_b.ndjson");
    write_experiment(d, run_experiment(d, 1));
    EXPECT_EQ(read_file(c.output_path), read_file(d.output_path));
    EXPECT_EQ(read_file(c.transcripts_path), read_file(d.transcripts_path));
    const std::string stats = read_file(c.output_path);
    EXPECT_EQ(std::count(stats.begin(), stats.end(), '\n'), 1);
    const auto j = nlohmann::json::parse(stats);
    EXPECT_EQ(j.at("trials"), 200);
    EXPECT_EQ(j.at("config").at("attack"), "wrong_basis");
}

TEST(outputs, unwritable_path_is_io_error) {
    ExperimentConfig c = p2_config(2, 5);
    c.output_path = "/nonexistent-dir/stats.json";
    EXPECT_THROW(write_experiment(c, run_experiment(c)), IoError);
}

TEST(outputs, transcripts_replay_to_the_stored_verdicts) {
    for (Protocol p : {Protocol::P2, Protocol::P3}) {
        for (bool flip : {false, true}) {
            ExperimentConfig c = p2_config(4, 150);
            c.protocol = p;
            c.bit = 1;
            if (flip) {
                c.attack = Attack::WrongBasis;
            }
            c.transcripts_path = "unused";
            const ExperimentResult r = run_experiment(c);
            int rejected = 0;
            for (const auto &line : r.transcript_lines) {
                const auto j = nlohmann::json::parse(line);
                const auto v = replay_verdict(j);
                ASSERT_TRUE(v.has_value());
                ASSERT_EQ(v->accepted(), j.at("accepted").get<bool>());
                ASSERT_EQ(std::string(to_string(v->reason)), j.at("reason").get<std::string>());
                rejected += !v->accepted();
            }
            EXPECT_EQ(rejected > 0, flip);
        }
    }
    ExperimentConfig bell = p2_config(4, 50);
    bell.attack = Attack::BellNoScramble;
    bell.scramble = false;
    bell.transcripts_path = "unused";
    for (const auto &line : run_experiment(bell).transcript_lines) {
        const auto j = nlohmann::json::parse(line);
        ASSERT_EQ(replay_verdict(j)->accepted(), j.at("accepted").get<bool>());
    }
}

TEST(outputs, transcript_line_shape) {
    ExperimentConfig c = p2_config(2, 1);
    c.transcripts_path = "unused";
    const auto j = nlohmann::json::parse(run_experiment(c).transcript_lines.at(0));
    EXPECT_EQ(j.at("trial"), 0);
    EXPECT_EQ(j.at("seed").get<uint64_t>(), trial_seed(c.seed, 0));
    std::string steps;
    for (const auto &m : j.at("messages")) {
        steps += m.at("sender").get<std::string>() + ":" + m.at("step").get<std::string>() + " ";
    }
    EXPECT_EQ(steps, "alice:C1 bob:C3 bob:C4 alice:C6 bob:R alice:U1 bob:U3 ");
}

TEST(bounds_table, rows_and_known_values) {
    const auto rows = bounds_table(IntRange::parse("1:2"), IntRange::parse("1:16"));
    EXPECT_EQ(rows.size(), 16u + 15u);  // (Q=1, n=2) is skipped
    const BoundReport &first = rows.front();
    EXPECT_EQ(first.n, 1);
    EXPECT_EQ(first.Q, 1);
    EXPECT_NEAR(first.bound, 0.5, 1e-12);
    EXPECT_EQ(first.upsilon, 3);
    EXPECT_NEAR(first.model_fidelity, 0.86603, 1e-5);
    ASSERT_TRUE(first.oracle_fidelity.has_value());
    EXPECT_NEAR(*first.oracle_fidelity, 0.85355, 1e-5);
    const BoundReport &last = rows.back();
    EXPECT_EQ(last.n, 2);
    EXPECT_EQ(last.Q, 16);
    EXPECT_NEAR(last.bound, 0.99367, 1e-4);
    EXPECT_FALSE(last.oracle_fidelity.has_value());
    for (const auto &r : rows) {
        EXPECT_EQ(r.oracle_fidelity.has_value(), r.n + r.Q <= 12);
    }
}

TEST(bounds_table, csv_file) {
    const std::string path = temp_path("bounds.csv");
    emit_bounds_table(IntRange::parse("1"), IntRange::parse("1:3"), path);
    EXPECT_EQ(read_file(path).substr(0, read_file(path).find('\n')), "Q,n,bound,upsilon,model_fidelity,oracle_fidelity");
    const std::string text = read_file(path);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    EXPECT_THROW(IntRange::parse("5:2"), ConfigError);
    EXPECT_THROW(IntRange::parse("x"), ConfigError);
}

TEST(steering_demo, zx_preset_opens_both_bits) {
    const SteeringStats s = steering_demo("zx", 10000, 3);
    EXPECT_EQ(s.per_bit[0].rate(), 1.0);
    EXPECT_EQ(s.per_bit[1].rate(), 1.0);
    EXPECT_LT(s.residual, 1e-9);
}

TEST(steering_demo, remix_preset_opens_both_bits) {
    const SteeringStats s = steering_demo("remix", 1000, 4);
    EXPECT_EQ(s.per_bit[0].rate(), 1.0);
    EXPECT_EQ(s.per_bit[1].rate(), 1.0);
}

TEST(steering_demo, unequal_densities_fail_cleanly) {
    EXPECT_THROW(steering_demo("unequal", 10, 1), DensitiesDiffer);
    EXPECT_THROW(steering_demo("bogus", 10, 1), ConfigError);
}

}  // namespace
}  // namespace qbc

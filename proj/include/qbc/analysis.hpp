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

// Closed forms for how well decoys hide the commit qubits.
//
// All binomial arithmetic is exact (Boost.Multiprecision); doubles appear only
// in the final fidelity values.

#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qbc/evidence.hpp"
#include "qbc/qcore.hpp"

namespace qbc {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("binary_entropy: argument outside [0, 1]");
    }
    double h = 0;
    if (x > 0) {
        h -= x * std::log2(x);
    }
    if (x < 1) {
        h -= (1 - x) * std::log2(1 - x);
    }
    return h;
}

/// 1 - 2^{-Q (1 - H(n/Q))}.
inline double fidelity_bound(int Q, int n) {
    if (n < 1 || Q < n) {
        throw std::domain_error("fidelity_bound: need Q >= n >= 1");
    }
    return 1.0 - std::exp2(-Q * (1.0 - binary_entropy(static_cast<double>(n) / Q)));
}

inline BigInt binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

inline constexpr int kMaxUpsilonBits = 512;

/// Number of (Q+n)-bit strings of Hamming weight at least n.
inline BigInt upsilon(int Q, int n) {
    if (Q < 0 || n < 0 || Q + n > kMaxUpsilonBits) {
        throw std::domain_error("upsilon: need Q, n >= 0 and Q + n <= 512");
    }
    const int total = Q + n;
    BigInt count = BigInt(1) << total;
    for (int j = 0; j < n; ++j) {
        count -= binomial(total, j);
    }
    return count;
}

/// Fidelity of the equal-weight diagonal evidence model against the
/// maximally mixed state: sqrt(upsilon / 2^{Q+n}).
inline double model_fidelity(int Q, int n) {
    const BigRational frac(upsilon(Q, n), BigInt(1) << (Q + n));
    return std::sqrt(frac.convert_to<double>());
}

struct BinomialRatio {
    BigRational exact_ratio;  // sum_{j<=t} C(T,j) / C(T,t)
    BigRational bound;        // (T-t+1) / (T-2t+1)
    bool holds() const { return exact_ratio <= bound; }
};

inline BinomialRatio truncated_binomial_ratio_bound(int T, int t) {
    if (t < 1 || T < 2 * t) {
        throw std::domain_error("truncated_binomial_ratio_bound: need t >= 1 and T >= 2t");
    }
    BigInt sum = 0;
    for (int j = 0; j <= t; ++j) {
        sum += binomial(T, j);
    }
    BinomialRatio r{BigRational(sum, binomial(T, t)), BigRational(T - t + 1, T - 2 * t + 1)};
    if (!r.holds()) {
        throw std::logic_error("truncated_binomial_ratio_bound: exact ratio exceeds the bound");
    }
    return r;
}

/// Largest evidence size for which the exact mixture is evaluated.
inline constexpr int kOracleEvidenceLimit = 12;

struct BoundReport {
    int Q = 0;
    int n = 0;
    double bound = 0;
    BigInt upsilon;
    double model_fidelity = 0;
    std::optional<double> oracle_fidelity;

    bool model_meets_bound() const { return model_fidelity >= bound; }
    bool oracle_meets_bound() const { return !oracle_fidelity || *oracle_fidelity >= bound; }

    std::string csv_row() const {
        std::ostringstream out;
        out.precision(10);
        out << Q << ',' << n << ',' << bound << ',' << upsilon.str() << ',' << model_fidelity << ',';
        if (oracle_fidelity) {
            out << *oracle_fidelity;
        }
        return out.str();
    }

    static const char *csv_header() { return "Q,n,bound,upsilon,model_fidelity,oracle_fidelity"; }
};

inline BoundReport bound_report(int Q, int n) {
    return {Q, n, fidelity_bound(Q, n), upsilon(Q, n), model_fidelity(Q, n), std::nullopt};
}

/// Exact fidelity between the decoy-padded evidence for `commit_states` and
/// the maximally mixed state on Q+n qubits.
inline double mixture_oracle_fidelity(int Q, const std::vector<Register> &commit_states) {
    const int total = Q + static_cast<int>(commit_states.size());
    if (total > kOracleEvidenceLimit) {
        throw std::domain_error("mixture_oracle_fidelity: Q + n exceeds the exact-mixture limit");
    }
    return block_fidelity(SymmetricEvidence(commit_states, total).blocks(), maximally_mixed_blocks(total));
}

inline BoundReport compare_with_mixture_oracle(int Q, int n, const std::vector<Register> &commit_states) {
    if (static_cast<int>(commit_states.size()) != n) {
        throw std::invalid_argument("compare_with_mixture_oracle: need exactly n commit states");
    }
    BoundReport r = bound_report(Q, n);
    r.oracle_fidelity = mixture_oracle_fidelity(Q, commit_states);
    return r;
}

/// n copies of one commit state, the situation the equal-weight model describes.
inline BoundReport compare_with_mixture_oracle(int Q, int n, const Register &commit_state) {
    return compare_with_mixture_oracle(Q, n, std::vector<Register>(static_cast<size_t>(n), commit_state));
}

}  // namespace qbc

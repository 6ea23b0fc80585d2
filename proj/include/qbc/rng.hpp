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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace qbc {

/// The public mixing function used for every seed derivation (SplitMix64 finalizer).
constexpr uint64_t splitmix64(uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr uint64_t fnv1a(std::string_view s) noexcept {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed of trial `index` under `master`. Independent of scheduling order.
constexpr uint64_t trial_seed(uint64_t master, uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index + 1));
}

/// Deterministic 64-bit generator with hierarchical splitting.
///
/// `child(label)` depends only on the seed this generator was built from,
/// never on how many values were drawn, so the streams of a trial (party,
/// step) are stable when unrelated steps are added or removed.
///
/// All sampling helpers are written against the raw engine output so the
/// streams do not depend on the standard library's distribution classes.
class Rng {
  public:
    explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

    uint64_t seed() const { return seed_; }

    Rng child(std::string_view label) const { return Rng(splitmix64(seed_ ^ fnv1a(label))); }
    Rng child(uint64_t index) const { return Rng(splitmix64(seed_ ^ splitmix64(index + 0x51ED2701ULL))); }

    uint64_t next() { return engine_(); }

    bool bit() { return (engine_() >> 63) != 0; }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n), unbiased (rejection on the top residue class).
    uint64_t below(uint64_t n) {
        if (n == 0) {
            throw std::invalid_argument("Rng::below: empty range");
        }
        const uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; used only for random test unitaries.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

/// A bijection on {0, ..., size-1}; `image[i]` is where position i goes.
struct Permutation {
    std::vector<int> image;

    static Permutation identity(int size) {
        Permutation p;
        p.image.resize(size);
        std::iota(p.image.begin(), p.image.end(), 0);
        return p;
    }

    static Permutation random(int size, Rng &rng) {
        Permutation p = identity(size);
        for (int i = size - 1; i > 0; --i) {
            std::swap(p.image[i], p.image[rng.below(static_cast<uint64_t>(i) + 1)]);
        }
        return p;
    }

    int size() const { return static_cast<int>(image.size()); }
    int operator()(int i) const { return image.at(i); }

    bool is_bijection() const {
        std::vector<char> seen(image.size(), 0);
        for (int v : image) {
            if (v < 0 || v >= size() || seen[v]) {
                return false;
            }
            seen[v] = 1;
        }
        return true;
    }

    Permutation inverse() const {
        Permutation inv;
        inv.image.resize(image.size());
        for (int i = 0; i < size(); ++i) {
            inv.image[image[i]] = i;
        }
        return inv;
    }

    int fixed_points() const {
        int c = 0;
        for (int i = 0; i < size(); ++i) {
            c += image[i] == i;
        }
        return c;
    }
};

/// Uniform k-subset of {0, ..., m-1}, returned sorted.
inline std::vector<int> random_subset(int m, int k, Rng &rng) {
    if (k < 0 || k > m) {
        throw std::invalid_argument("random_subset: k out of range");
    }
    std::vector<int> pool(m);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + rng.below(static_cast<uint64_t>(m - i))]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace qbc

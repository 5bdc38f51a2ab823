// Copyright Contributors to the cad3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ATen/core/Generator.h>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cad {

/// SplitMix64 finalizer. All seeded randomness in the project is derived from
/// hashes of (seed, counters), so results never depend on call order.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(seed);
    for (auto k : keys) {
        h = hash_combine(h, k);
    }
    return h;
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Counter-based uniform: same (key, index) always gives the same value.
constexpr double hashed_uniform(std::uint64_t key, std::uint64_t index) {
    return to_unit(hash_combine(key, index));
}

/// Small sequential generator with portable distributions (std distributions
/// are implementation-defined, which would break cross-platform determinism).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next() { return engine_(); }
    double uniform() { return to_unit(engine_()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi] inclusive.
    std::int64_t integer(std::int64_t lo, std::int64_t hi);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_;
};

/// Seeded torch CPU generator for tensor-valued draws.
at::Generator make_generator(std::uint64_t seed);

} // namespace cad

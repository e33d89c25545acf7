#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cplsh/normal.hpp"

namespace cplsh {

// SplitMix64 finalizer; used to derive independent streams from a master seed.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a stream seed from a master seed and a path of integers,
/// e.g. (master, {tag, table, hash}). Distinct paths give independent streams.
inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path) {
    uint64_t h = mix64(master);
    for (uint64_t x : path) {
        h = mix64(h ^ mix64(x + 0x165667b19e3779f9ULL));
    }
    return h;
}

/// Seedable random stream. Gaussians come from the inverse-CDF method
/// (one uniform per sample) so sequences are reproducible across platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in (0, 1), 53-bit resolution.
    double uniform01() {
        const uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double gaussian() { return normal_quantile(uniform01()); }

    /// Random sign, +1 or -1.
    int sign() { return (engine_() >> 63) ? -1 : 1; }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        std::uniform_int_distribution<uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace cplsh

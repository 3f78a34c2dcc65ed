// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded RNG with explicitly coded distributions. std:: distribution
// objects are implementation defined, which would break the byte-identical
// manifest contract across standard libraries; everything here is pinned.

#ifndef WSEP_RNG_HPP_
#define WSEP_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "wsep/common.hpp"

namespace wsep {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for a (seed, index) pair; used by parallel workers.
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    // SplitMix64 step mixes seed and index into a fresh engine seed.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    WSEP_CHECK(n > 0, "uniform_index: empty range");
    // Rejection sampling to avoid modulo bias.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  double normal() {
    // Box-Muller; cache the second deviate.
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    have_cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // Zero-truncated Poisson: P(k) proportional to lambda^k e^-lambda / k!
  // for k >= 1. Inversion on the truncated CDF.
  int poisson_truncated(double lambda) {
    WSEP_CHECK(lambda > 0.0, "poisson_truncated: lambda must be > 0");
    double u = uniform();
    // Renormalize by 1 - P(0).
    double p0 = std::exp(-lambda);
    double target = u * (1.0 - p0);
    double pk = p0 * lambda;  // P(1) before truncation
    double cum = pk;
    int k = 1;
    while (cum < target && k < 10000) {
      ++k;
      pk *= lambda / k;
      cum += pk;
    }
    return k;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace wsep

#endif  // WSEP_RNG_HPP_

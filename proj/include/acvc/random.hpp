/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ACVC_RANDOM_HPP_
#define ACVC_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace acvc {

using Rng = std::mt19937_64;

// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Per-(epoch, sample) stream derivation. Pure, so a whole epoch of random
/// choices depends only on the global seed and dataset order.
struct SeedPolicy {
  std::uint64_t global_seed = 0;

  std::uint64_t derive(std::uint64_t epoch, std::uint64_t sample) const {
    return mix64(mix64(mix64(global_seed) ^ epoch) ^ (sample * 0xD6E8FEB86659FD93ull));
  }
  Rng stream(std::uint64_t epoch, std::uint64_t sample) const {
    return Rng(derive(epoch, sample));
  }
};

// Unbiased integer in [0, n) by rejection; independent of the standard
// library's distribution implementations.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // 2^64 mod n values at the bottom of the range are rejected so the rest
  // is a whole number of copies of [0, n).
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r < threshold);
  return r % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Standard normal via Box-Muller (one draw per call, the pair partner is
// discarded to keep the stream position simple to reason about).
inline double standard_normal(Rng& rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Poisson draw: Knuth's product method for small means, a rounded normal
// approximation above 60 where the product method gets slow.
inline double poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  if (mean > 60.0) {
    const double v = std::round(mean + std::sqrt(mean) * standard_normal(rng));
    return v < 0.0 ? 0.0 : v;
  }
  const double limit = std::exp(-mean);
  double product = uniform01(rng);
  int count = 0;
  while (product > limit) {
    ++count;
    product *= uniform01(rng);
  }
  return count;
}

}  // namespace acvc

#endif  // ACVC_RANDOM_HPP_

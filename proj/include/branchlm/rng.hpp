// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BRANCHLM_RNG_HPP
#define BRANCHLM_RNG_HPP

#include <cstdint>

namespace blm {

/// Seeded deterministic generator used everywhere reproducibility matters
/// (weight init, dataset shuffles, synthetic trace walks).
///
/// This is splitmix64: state advances by the golden-ratio increment
/// 0x9e3779b97f4a7c15 and the output is the mixed state
/// (xor-shift 30, * 0xbf58476d1ce4e5b9, xor-shift 27, * 0x94d049bb133111eb,
/// xor-shift 31). Identical seeds produce identical streams on every
/// platform; nothing in the artifact depends on the C++ standard library's
/// unspecified distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be nonzero. Plain modulo;
  /// the (negligible) bias is irrelevant here, determinism is not.
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

}  // namespace blm

#endif  // BRANCHLM_RNG_HPP

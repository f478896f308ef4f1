#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "sngp/linalg.hpp"

namespace sngp {

/// Deterministic random stream.
///
/// Core generator is xoshiro256** (Blackman & Vigna), with its 256-bit state
/// filled from the 64-bit seed by four rounds of splitmix64. Derived streams
/// hash a text label with 64-bit FNV-1a, xor it into the parent seed and
/// re-seed, so `Rng(7).derive("shuffle")` is the same stream on every run.
///
/// Draws:
///   uniform01  = (next() >> 11) * 2^-53, in [0, 1)
///   normal     = Box-Muller on two uniforms, u1 mapped to (0, 1]; the
///                second variate of each pair is cached
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  Rng derive(std::string_view label) const;

  std::uint64_t next_u64();
  double uniform01();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vector sample_normal(Rng& rng, std::size_t n);
Vector sample_uniform(Rng& rng, std::size_t n, double lo, double hi);

}  // namespace sngp

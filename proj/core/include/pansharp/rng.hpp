#pragma once

#include <array>
#include <cstdint>

namespace pansharp {

/// SplitMix64 step; used to expand a 64-bit seed into generator state.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** 1.0 (Blackman & Vigna). The four state words are the first
/// four outputs of SplitMix64 started at the user seed, which makes every
/// stream a pure function of its seed on any platform.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound) by rejection (bound > 0).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller (no cached second value).
  double normal();

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Stable 64-bit mix of two words (seed derivation for sub-streams).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pansharp

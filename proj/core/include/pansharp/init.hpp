#pragma once

#include <cstdint>

#include "pansharp/rng.hpp"
#include "pansharp/tensor.hpp"

namespace pansharp {

enum class InitScheme {
  /// U(-b, b) with b = sqrt(6 / fan_in), fan_in = c * h * w of the weight.
  HeUniform,
  Zeros,
};

/// Deterministic parameter tensor. Draws come from xoshiro256** seeded
/// through SplitMix64 (see rng.hpp), one draw per element in storage order.
Tensor seeded_init(Shape shape, std::uint64_t seed, InitScheme scheme);

/// Same, continuing an existing stream.
Tensor seeded_init(Shape shape, Xoshiro256& rng, InitScheme scheme);

/// Variance of the distribution `scheme` draws from for `shape`.
double init_variance(Shape shape, InitScheme scheme);

}  // namespace pansharp

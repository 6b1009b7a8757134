#include "pansharp/init.hpp"

#include <cmath>
#include <vector>

#include "pansharp/errors.hpp"

namespace pansharp {

namespace {

std::size_t fan_in(const Shape& s) { return s.c * s.h * s.w; }

}  // namespace

Tensor seeded_init(Shape shape, Xoshiro256& rng, InitScheme scheme) {
  if (shape.numel() == 0) throw InvalidArgument("seeded_init: empty shape");
  switch (scheme) {
    case InitScheme::Zeros:
      return Tensor::zeros(shape, true);
    case InitScheme::HeUniform: {
      const std::size_t fan = fan_in(shape);
      if (fan == 0) throw InvalidArgument("seeded_init: zero fan-in for " + shape.str());
      const double bound = std::sqrt(6.0 / static_cast<double>(fan));
      std::vector<double> v(shape.numel());
      for (double& x : v) x = (2.0 * rng.uniform() - 1.0) * bound;
      return Tensor::from(shape, std::move(v), true);
    }
  }
  throw InvalidArgument("seeded_init: unknown scheme");
}

Tensor seeded_init(Shape shape, std::uint64_t seed, InitScheme scheme) {
  Xoshiro256 rng(seed);
  return seeded_init(shape, rng, scheme);
}

double init_variance(Shape shape, InitScheme scheme) {
  if (scheme == InitScheme::Zeros) return 0.0;
  const std::size_t fan = fan_in(shape);
  if (fan == 0) throw InvalidArgument("init_variance: zero fan-in");
  return 2.0 / static_cast<double>(fan);
}

}  // namespace pansharp

#include "pansharp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pansharp/errors.hpp"
#include "pansharp/rng.hpp"

namespace pansharp {

namespace {

struct Material {
  std::array<double, 4> spectrum{};
  double amplitude = 0.0;
  double freq = 0.0;
  double angle = 0.0;
};

struct Site {
  double x = 0.0;
  double y = 0.0;
  std::size_t material = 0;
  double phase = 0.0;
};

}  // namespace

SyntheticScene synthesize_scene(const SceneOptions& o) {
  if (o.width == 0 || o.height == 0 || o.materials == 0 || !(o.parcel_area > 0.0)) {
    throw InvalidArgument("synthesize_scene: dimensions, materials and parcel area must be positive");
  }
  Xoshiro256 rng(o.seed);
  const double span = o.range.span();

  std::vector<Material> materials(o.materials);
  for (auto& m : materials) {
    for (auto& v : m.spectrum) v = rng.uniform(0.15, 0.8);
    m.amplitude = rng.uniform(0.02, 0.08);
    m.freq = rng.uniform(0.15, 0.9);
    m.angle = rng.uniform(0.0, std::numbers::pi);
  }

  const auto n_sites = std::max<std::size_t>(
      2, static_cast<std::size_t>(static_cast<double>(o.width * o.height) / o.parcel_area));
  std::vector<Site> sites(n_sites);
  for (auto& s : sites) {
    s.x = rng.uniform(0.0, static_cast<double>(o.width));
    s.y = rng.uniform(0.0, static_cast<double>(o.height));
    s.material = static_cast<std::size_t>(rng.below(o.materials));
    s.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  Raster hrms(o.width, o.height, rgbn_roles(), o.range);
  Raster pan = Raster::single_band(o.width, o.height, BandRole::Pan, o.range);
  for (std::size_t y = 0; y < o.height; ++y) {
    for (std::size_t x = 0; x < o.width; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < sites.size(); ++i) {
        const double dx = px - sites[i].x;
        const double dy = py - sites[i].y;
        const double d = dx * dx + dy * dy;
        if (d < best) {
          best = d;
          nearest = i;
        }
      }
      const Site& site = sites[nearest];
      const Material& m = materials[site.material];
      const double u = px * std::cos(m.angle) + py * std::sin(m.angle);
      const double texture = m.amplitude * std::sin(m.freq * u + site.phase);
      double pan_value = 0.0;
      for (std::size_t b = 0; b < 4; ++b) {
        // Texture modulates brightness with a band-dependent gain so the
        // bands are correlated with, but not identical to, PAN.
        const double gain = 0.6 + 0.4 * m.spectrum[b];
        const double noise = 0.004 * rng.normal();
        const double v = o.range.min + span * (m.spectrum[b] + gain * texture + noise);
        hrms.at(b, y, x) = v;
        pan_value += o.pan_weights[b] * v;
      }
      pan.at(0, y, x) = pan_value;
    }
  }
  return SyntheticScene{std::move(hrms), std::move(pan)};
}

}  // namespace pansharp

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "pansharp/raster.hpp"

namespace pansharp {

struct SceneOptions {
  std::size_t width = 256;
  std::size_t height = 256;
  std::uint64_t seed = 1;
  ValueRange range = ValueRange::eleven_bit();
  /// Mean area in pixels of one land-cover parcel.
  double parcel_area = 400.0;
  std::size_t materials = 6;
  /// Spectral response used to build PAN from the four MS bands (sums to 1).
  std::array<double, 4> pan_weights{0.15, 0.30, 0.25, 0.30};
};

struct SyntheticScene {
  Raster hrms;  // 4 bands, R G B NIR
  Raster pan;   // 1 band on the same grid
};

/// Deterministic textured test scene: Voronoi parcels of a few materials with
/// distinct spectra, oriented gratings inside each parcel, and mild noise.
/// PAN is the pan_weights-weighted sum of the four bands.
SyntheticScene synthesize_scene(const SceneOptions& options);

}  // namespace pansharp

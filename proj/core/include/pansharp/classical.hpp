#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "pansharp/raster.hpp"

namespace pansharp::classical {

/// Inputs shared by every fusion method: MS at w x h, PAN at sw x sh.
struct FusionInput {
  const Raster& lrms;
  const Raster& pan;
  ScaleFactor s;
};

struct FusionOptions {
  /// Bands averaged into the intensity image. Empty means all bands.
  std::vector<std::size_t> intensity_bands;
};

struct FusionResult {
  Raster fused;
  /// Pixels where a ratio method fell back to the upsampled MS because the
  /// denominator was below 1e-9 of the value range.
  std::size_t passthrough_pixels = 0;
};

/// Generalized IHS: fused_b = ms_b + (P' - I).
FusionResult ihs_fuse(const FusionInput& in, const FusionOptions& options = {});
/// Brovey: fused_b = ms_b * P' / I.
FusionResult brovey_fuse(const FusionInput& in, const FusionOptions& options = {});
/// Gram-Schmidt spectral sharpening with covariance injection gains.
FusionResult gs_fuse(const FusionInput& in, const FusionOptions& options = {});
/// Smoothing-filter intensity modulation: fused_b = ms_b * pan / lowpass(pan).
FusionResult sfim_fuse(const FusionInput& in, const FusionOptions& options = {});

// Building blocks, exposed for tests and for callers that want the pieces.

/// Checks geometry (pan = s * lrms, single-band PAN) and returns the
/// bicubically upsampled MS on the PAN grid.
Raster upsample_ms(const FusionInput& in);

/// Band mean over the selected bands, one plane.
std::vector<double> intensity(const Raster& ms, const FusionOptions& options);

/// PAN linearly mapped onto the mean and standard deviation of `target`.
/// Throws DegenerateInput if PAN has zero variance.
std::vector<double> match_mean_std(std::span<const double> pan, std::span<const double> target);

/// g_b = cov(ms_b, I) / var(I) with population moments.
std::vector<double> gs_gains(const Raster& ms_up, std::span<const double> intensity);

enum class Method { Ihs, Brovey, Gs, Sfim };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);
FusionResult fuse(Method m, const FusionInput& in, const FusionOptions& options = {});

}  // namespace pansharp::classical

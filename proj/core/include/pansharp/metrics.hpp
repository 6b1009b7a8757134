#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pansharp/raster.hpp"

namespace pansharp::metrics {

struct BandScores {
  double mean = 0.0;
  std::vector<double> per_band;
};

/// Per-band root mean squared error.
BandScores rmse(const Raster& fused, const Raster& ref);

/// Per-band relative mean absolute error in percent:
/// 100 * mean|f - r| / mean(r). Reference band means must be positive.
BandScores rmae(const Raster& fused, const Raster& ref);

/// 100 / s * sqrt(mean_b (RMSE_b / mu_b)^2).
double ergas(const Raster& fused, const Raster& ref, ScaleFactor s);

struct SamResult {
  double degrees = 0.0;
  std::size_t valid_pixels = 0;
  std::size_t skipped_pixels = 0;
};

/// Mean spectral angle over pixels where both vectors are non-zero.
SamResult sam(const Raster& fused, const Raster& ref);

/// Wang-Bovik Q of two equally long samples; nullopt when the denominator
/// is zero.
std::optional<double> q_index(std::span<const double> x, std::span<const double> y);

struct UiqiResult {
  double mean = 0.0;
  std::vector<double> per_band;
  std::size_t skipped_windows = 0;
};

/// Sliding window Q (window x window, stride 1), averaged over windows then bands.
UiqiResult uiqi(const Raster& fused, const Raster& ref, std::size_t window = 8);

/// Global Q between two planes. Throws DegenerateInput on a zero denominator.
double global_q(std::span<const double> x, std::span<const double> y);

double d_lambda(const Raster& fused, const Raster& lrms, double p = 1.0);
double d_s(const Raster& fused, const Raster& lrms, const Raster& pan, ScaleFactor s,
           double q = 1.0);
double qnr(double d_lambda, double d_s, double a = 1.0, double b = 1.0);

enum class Protocol { Reduced, Full };

struct MetricReport {
  Protocol protocol = Protocol::Reduced;
  std::optional<double> ergas;
  std::optional<double> rmse;
  std::optional<double> rmae;
  std::optional<double> sam_degrees;
  std::optional<double> uiqi;
  double d_lambda = 0.0;
  double d_s = 0.0;
  double qnr = 0.0;
  std::vector<double> rmse_per_band;
  std::vector<double> rmae_per_band;
  std::vector<double> uiqi_per_band;
  std::size_t sam_skipped_pixels = 0;
  std::size_t uiqi_skipped_windows = 0;
};

/// Definition tag written into reports so RMAE values stay interpretable.
inline constexpr const char* kRmaeDefinition = "relative-mae-percent/v1";

struct EvaluationInput {
  const Raster& fused;
  const Raster* ref = nullptr;  // null selects the full-resolution protocol
  const Raster& lrms;
  const Raster& pan;
  ScaleFactor s;
  std::size_t uiqi_window = 8;
};

MetricReport evaluate_all(const EvaluationInput& in);

std::string to_string(Protocol p);

}  // namespace pansharp::metrics

#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They follow the textbook formulas directly (plain loops, long
// double accumulation) and share no code with the library beyond the
// Raster container.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pansharp/isodata.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/tensor.hpp"

namespace oracle {

using pansharp::Raster;

Raster random_raster(std::size_t w, std::size_t h, std::vector<pansharp::BandRole> roles,
                     std::uint64_t seed, double lo = 0.0, double hi = 2047.0);
std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                  double hi = 1.0);

// --- resampling -----------------------------------------------------------

double keys(double x);
/// Bicubic resize done row pass then column pass with explicit weighted sums.
Raster resize(const Raster& src, std::size_t dw, std::size_t dh);

// --- metrics --------------------------------------------------------------

double rmse_band(std::span<const double> f, std::span<const double> r);
double rmse(const Raster& f, const Raster& r);
double rmae(const Raster& f, const Raster& r);
double ergas(const Raster& f, const Raster& r, int s);
double sam_degrees(const Raster& f, const Raster& r);
double q(std::span<const double> x, std::span<const double> y);
double uiqi(const Raster& f, const Raster& r, std::size_t window = 8);
double d_lambda(const Raster& f, const Raster& lrms);
/// pan_low is pan downsampled to the lrms grid.
double d_s(const Raster& f, const Raster& lrms, const Raster& pan, const Raster& pan_low);

// --- gradients ------------------------------------------------------------

/// Central difference of `loss` along `dir` applied to `values` in place
/// (restored afterwards).
double directional_fd(const std::function<double()>& loss, std::span<double> values,
                      std::span<const double> dir, double eps = 1e-5);
/// Central difference for one coordinate.
double coordinate_fd(const std::function<double()>& loss, std::span<double> values,
                     std::size_t i, double eps = 1e-5);
double relative_error(double a, double b, double floor = 1e-12);

// --- clustering -----------------------------------------------------------

/// Best agreement over every injective relabeling of a's classes onto b's.
double exhaustive_agreement(const pansharp::isodata::LabelMap& a,
                            const pansharp::isodata::LabelMap& b);
/// Within-cluster sum of squares for a labeling with class means as centers.
double within_sse(const Raster& img, const std::vector<std::uint32_t>& labels, std::size_t k);

// --- misc -----------------------------------------------------------------

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace oracle

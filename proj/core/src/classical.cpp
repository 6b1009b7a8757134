#include "pansharp/classical.hpp"

#include <cmath>
#include <string>

#include "pansharp/errors.hpp"

namespace pansharp::classical {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size());
}

double ratio_epsilon(const Raster& r) { return 1e-9 * r.range().span(); }

}  // namespace

Raster upsample_ms(const FusionInput& in) {
  if (in.pan.bands() != 1) {
    throw ShapeError("fusion: PAN must be single-band, got " + in.pan.describe());
  }
  const auto f = static_cast<std::size_t>(in.s.value());
  if (in.pan.width() != in.lrms.width() * f || in.pan.height() != in.lrms.height() * f) {
    throw ShapeError("fusion: PAN " + in.pan.describe() + " is not s=" + std::to_string(f) +
                     " times MS " + in.lrms.describe());
  }
  return bicubic_resample(in.lrms, in.pan.width(), in.pan.height());
}

std::vector<double> intensity(const Raster& ms, const FusionOptions& options) {
  std::vector<std::size_t> bands = options.intensity_bands;
  if (bands.empty()) {
    for (std::size_t b = 0; b < ms.bands(); ++b) bands.push_back(b);
  }
  for (std::size_t b : bands) {
    if (b >= ms.bands()) throw InvalidArgument("intensity band index out of range");
  }
  std::vector<double> out(ms.plane_size(), 0.0);
  for (std::size_t b : bands) {
    auto plane = ms.band(b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += plane[i];
  }
  const double inv = 1.0 / static_cast<double>(bands.size());
  for (double& v : out) v *= inv;
  return out;
}

std::vector<double> match_mean_std(std::span<const double> pan, std::span<const double> target) {
  const double mp = mean_of(pan);
  const double sp = std::sqrt(variance_of(pan, mp));
  const double mt = mean_of(target);
  const double st = std::sqrt(variance_of(target, mt));
  if (!(sp > 0.0)) {
    throw DegenerateInput("PAN has zero variance; mean/std matching is undefined");
  }
  std::vector<double> out(pan.size());
  const double gain = st / sp;
  for (std::size_t i = 0; i < pan.size(); ++i) out[i] = (pan[i] - mp) * gain + mt;
  return out;
}

std::vector<double> gs_gains(const Raster& ms_up, std::span<const double> intensity) {
  const double mi = mean_of(intensity);
  const double vi = variance_of(intensity, mi);
  if (!(vi > 0.0)) {
    throw DegenerateInput("GS: synthetic intensity has zero variance");
  }
  std::vector<double> gains(ms_up.bands());
  for (std::size_t b = 0; b < ms_up.bands(); ++b) {
    auto plane = ms_up.band(b);
    const double mb = mean_of(plane);
    double cov = 0.0;
    for (std::size_t i = 0; i < plane.size(); ++i) cov += (plane[i] - mb) * (intensity[i] - mi);
    cov /= static_cast<double>(plane.size());
    gains[b] = cov / vi;
  }
  return gains;
}

FusionResult ihs_fuse(const FusionInput& in, const FusionOptions& options) {
  Raster fused = upsample_ms(in);
  const auto I = intensity(fused, options);
  const auto P = match_mean_std(in.pan.data(), I);
  for (std::size_t b = 0; b < fused.bands(); ++b) {
    auto plane = fused.band(b);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] += P[i] - I[i];
  }
  return {std::move(fused), 0};
}

FusionResult brovey_fuse(const FusionInput& in, const FusionOptions& options) {
  Raster fused = upsample_ms(in);
  const auto I = intensity(fused, options);
  const auto P = match_mean_std(in.pan.data(), I);
  const double eps = ratio_epsilon(in.lrms);
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (I[i] <= eps) {
      ++degenerate;
      continue;
    }
    const double ratio = P[i] / I[i];
    for (std::size_t b = 0; b < fused.bands(); ++b) fused.band(b)[i] *= ratio;
  }
  return {std::move(fused), degenerate};
}

FusionResult gs_fuse(const FusionInput& in, const FusionOptions& options) {
  if (in.lrms.bands() < 2) throw InvalidArgument("GS fusion needs at least two bands");
  Raster fused = upsample_ms(in);
  const auto I = intensity(fused, options);
  const auto gains = gs_gains(fused, I);
  const auto P = match_mean_std(in.pan.data(), I);
  for (std::size_t b = 0; b < fused.bands(); ++b) {
    auto plane = fused.band(b);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] += gains[b] * (P[i] - I[i]);
  }
  return {std::move(fused), 0};
}

FusionResult sfim_fuse(const FusionInput& in, const FusionOptions&) {
  Raster fused = upsample_ms(in);
  const Raster smooth = lowpass(in.pan, in.s);
  const auto pan = in.pan.data();
  const auto low = smooth.data();
  const double eps = ratio_epsilon(in.pan);
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < pan.size(); ++i) {
    if (low[i] <= eps) {
      ++degenerate;
      continue;
    }
    const double ratio = pan[i] / low[i];
    for (std::size_t b = 0; b < fused.bands(); ++b) fused.band(b)[i] *= ratio;
  }
  return {std::move(fused), degenerate};
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Ihs: return "ihs";
    case Method::Brovey: return "brovey";
    case Method::Gs: return "gs";
    case Method::Sfim: return "sfim";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  if (name == "ihs") return Method::Ihs;
  if (name == "brovey") return Method::Brovey;
  if (name == "gs") return Method::Gs;
  if (name == "sfim") return Method::Sfim;
  throw InvalidArgument("unknown classical fusion method '" + std::string(name) +
                        "' (valid: ihs, brovey, gs, sfim)");
}

FusionResult fuse(Method m, const FusionInput& in, const FusionOptions& options) {
  switch (m) {
    case Method::Ihs: return ihs_fuse(in, options);
    case Method::Brovey: return brovey_fuse(in, options);
    case Method::Gs: return gs_fuse(in, options);
    case Method::Sfim: return sfim_fuse(in, options);
  }
  throw InvalidArgument("unknown fusion method");
}

}  // namespace pansharp::classical

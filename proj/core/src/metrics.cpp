#include "pansharp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pansharp/errors.hpp"

namespace pansharp::metrics {

namespace {

void require_same_geometry(const char* what, const Raster& a, const Raster& b) {
  if (!a.same_geometry(b)) {
    throw ShapeError(std::string(what) + ": geometry mismatch " + a.describe() + " vs " +
                     b.describe());
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// cov(x, x) must be bitwise equal to the variance so that Q(x, x) == 1.
double covariance(std::span<const double> x, std::span<const double> y, double mx, double my) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size());
}

}  // namespace

BandScores rmse(const Raster& fused, const Raster& ref) {
  require_same_geometry("rmse", fused, ref);
  BandScores out;
  for (std::size_t b = 0; b < ref.bands(); ++b) {
    auto f = fused.band(b);
    auto r = ref.band(b);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - r[i]) * (f[i] - r[i]);
    out.per_band.push_back(std::sqrt(s / static_cast<double>(f.size())));
  }
  out.mean = mean_of(out.per_band);
  return out;
}

BandScores rmae(const Raster& fused, const Raster& ref) {
  require_same_geometry("rmae", fused, ref);
  BandScores out;
  for (std::size_t b = 0; b < ref.bands(); ++b) {
    auto f = fused.band(b);
    auto r = ref.band(b);
    const double mr = mean_of(r);
    if (!(mr > 0.0)) {
      throw DegenerateInput("rmae: reference band " + std::to_string(b) +
                            " has non-positive mean");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - r[i]);
    out.per_band.push_back(100.0 * (s / static_cast<double>(f.size())) / mr);
  }
  out.mean = mean_of(out.per_band);
  return out;
}

double ergas(const Raster& fused, const Raster& ref, ScaleFactor s) {
  const BandScores e = rmse(fused, ref);
  double acc = 0.0;
  for (std::size_t b = 0; b < ref.bands(); ++b) {
    const double mu = mean_of(ref.band(b));
    if (mu == 0.0) {
      throw DegenerateInput("ergas: reference band " + std::to_string(b) + " has zero mean");
    }
    const double rel = e.per_band[b] / mu;
    acc += rel * rel;
  }
  return 100.0 / static_cast<double>(s.value()) *
         std::sqrt(acc / static_cast<double>(ref.bands()));
}

SamResult sam(const Raster& fused, const Raster& ref) {
  require_same_geometry("sam", fused, ref);
  if (ref.bands() < 2) throw InvalidArgument("sam: needs at least two bands");
  SamResult out;
  double acc = 0.0;
  const std::size_t n = ref.plane_size();
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t b = 0; b < ref.bands(); ++b) {
      const double x = fused.band(b)[i];
      const double y = ref.band(b)[i];
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) {
      ++out.skipped_pixels;
      continue;
    }
    const double c = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    acc += std::acos(c);
    ++out.valid_pixels;
  }
  if (out.valid_pixels == 0) {
    throw DegenerateInput("sam: every pixel has a zero spectral vector");
  }
  out.degrees = acc / static_cast<double>(out.valid_pixels) * (180.0 / std::numbers::pi);
  return out;
}

std::optional<double> q_index(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw ShapeError("q_index: sample size mismatch");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  const double sxx = covariance(x, x, mx, mx);
  const double syy = covariance(y, y, my, my);
  const double sxy = covariance(x, y, mx, my);
  const double den = (sxx + syy) * (mx * mx + my * my);
  if (den == 0.0) return std::nullopt;
  return 4.0 * (sxy * (mx * my)) / den;
}

UiqiResult uiqi(const Raster& fused, const Raster& ref, std::size_t window) {
  require_same_geometry("uiqi", fused, ref);
  if (window == 0 || ref.width() < window || ref.height() < window) {
    throw InvalidArgument("uiqi: image " + ref.describe() + " is smaller than the " +
                          std::to_string(window) + "x" + std::to_string(window) + " window");
  }
  UiqiResult out;
  std::vector<double> wx(window * window), wy(window * window);
  for (std::size_t b = 0; b < ref.bands(); ++b) {
    auto f = fused.band(b);
    auto r = ref.band(b);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t y0 = 0; y0 + window <= ref.height(); ++y0) {
      for (std::size_t x0 = 0; x0 + window <= ref.width(); ++x0) {
        for (std::size_t dy = 0; dy < window; ++dy) {
          const std::size_t row = (y0 + dy) * ref.width() + x0;
          std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(row), window,
                      wx.begin() + static_cast<std::ptrdiff_t>(dy * window));
          std::copy_n(r.begin() + static_cast<std::ptrdiff_t>(row), window,
                      wy.begin() + static_cast<std::ptrdiff_t>(dy * window));
        }
        if (auto q = q_index(wx, wy)) {
          acc += *q;
          ++count;
        } else {
          ++out.skipped_windows;
        }
      }
    }
    if (count == 0) {
      throw DegenerateInput("uiqi: every window of band " + std::to_string(b) +
                            " has a zero denominator");
    }
    out.per_band.push_back(acc / static_cast<double>(count));
  }
  out.mean = mean_of(out.per_band);
  return out;
}

double global_q(std::span<const double> x, std::span<const double> y) {
  auto q = q_index(x, y);
  if (!q) throw DegenerateInput("global Q: zero denominator (constant or zero-mean band)");
  return *q;
}

double d_lambda(const Raster& fused, const Raster& lrms, double p) {
  if (fused.bands() != lrms.bands()) {
    throw ShapeError("d_lambda: band count mismatch " + fused.describe() + " vs " +
                     lrms.describe());
  }
  const std::size_t c = fused.bands();
  if (c < 2) throw InvalidArgument("d_lambda: needs at least two bands");
  if (!(p > 0.0)) throw InvalidArgument("d_lambda: exponent must be positive");
  double acc = 0.0;
  for (std::size_t b = 0; b < c; ++b) {
    for (std::size_t k = 0; k < c; ++k) {
      if (b == k) continue;
      const double qf = global_q(fused.band(b), fused.band(k));
      const double ql = global_q(lrms.band(b), lrms.band(k));
      acc += std::pow(std::abs(qf - ql), p);
    }
  }
  return std::pow(acc / static_cast<double>(c * (c - 1)), 1.0 / p);
}

double d_s(const Raster& fused, const Raster& lrms, const Raster& pan, ScaleFactor s, double q) {
  const auto f = static_cast<std::size_t>(s.value());
  if (pan.bands() != 1 || fused.width() != pan.width() || fused.height() != pan.height()) {
    throw ShapeError("d_s: fused " + fused.describe() + " and PAN " + pan.describe() +
                     " must share one grid");
  }
  if (lrms.bands() != fused.bands() || lrms.width() * f != pan.width() ||
      lrms.height() * f != pan.height()) {
    throw ShapeError("d_s: LRMS " + lrms.describe() + " inconsistent with PAN " +
                     pan.describe() + " at s=" + std::to_string(f));
  }
  if (!(q > 0.0)) throw InvalidArgument("d_s: exponent must be positive");
  const Raster pan_low = downsample(pan, s);
  double acc = 0.0;
  for (std::size_t b = 0; b < fused.bands(); ++b) {
    const double qh = global_q(fused.band(b), pan.band(0));
    const double ql = global_q(lrms.band(b), pan_low.band(0));
    acc += std::pow(std::abs(qh - ql), q);
  }
  return std::pow(acc / static_cast<double>(fused.bands()), 1.0 / q);
}

double qnr(double d_lambda, double d_s, double a, double b) {
  return std::pow(1.0 - d_lambda, a) * std::pow(1.0 - d_s, b);
}

MetricReport evaluate_all(const EvaluationInput& in) {
  MetricReport rep;
  rep.protocol = in.ref ? Protocol::Reduced : Protocol::Full;
  if (in.ref) {
    const Raster& ref = *in.ref;
    require_same_geometry("evaluate", in.fused, ref);
    const BandScores e = rmse(in.fused, ref);
    const BandScores a = rmae(in.fused, ref);
    const SamResult s = sam(in.fused, ref);
    const UiqiResult u = uiqi(in.fused, ref, in.uiqi_window);
    rep.ergas = ergas(in.fused, ref, in.s);
    rep.rmse = e.mean;
    rep.rmae = a.mean;
    rep.sam_degrees = s.degrees;
    rep.uiqi = u.mean;
    rep.rmse_per_band = e.per_band;
    rep.rmae_per_band = a.per_band;
    rep.uiqi_per_band = u.per_band;
    rep.sam_skipped_pixels = s.skipped_pixels;
    rep.uiqi_skipped_windows = u.skipped_windows;
  }
  rep.d_lambda = d_lambda(in.fused, in.lrms);
  rep.d_s = d_s(in.fused, in.lrms, in.pan, in.s);
  rep.qnr = qnr(rep.d_lambda, rep.d_s);
  return rep;
}

std::string to_string(Protocol p) { return p == Protocol::Reduced ? "reduced" : "full"; }

}  // namespace pansharp::metrics

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <unistd.h>

namespace oracle {

Raster random_raster(std::size_t w, std::size_t h, std::vector<pansharp::BandRole> roles,
                     std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> data(w * h * roles.size());
  for (double& v : data) v = dist(gen);
  return Raster(w, h, std::move(roles), std::move(data));
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

double keys(double x) {
  const double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
  if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
  return 0.0;
}

namespace {

// Resamples one axis of a strided line.
void resample_line(const double* src, std::size_t n, std::size_t stride_in, double* dst,
                   std::size_t m, std::size_t stride_out) {
  for (std::size_t j = 0; j < m; ++j) {
    const double pos = (static_cast<double>(j) + 0.5) * static_cast<double>(n) /
                           static_cast<double>(m) - 0.5;
    const double base = std::floor(pos);
    long double acc = 0.0L;
    for (int k = -1; k <= 2; ++k) {
      const double tap = base + k;
      const long idx = std::clamp<long>(static_cast<long>(tap), 0, static_cast<long>(n) - 1);
      acc += static_cast<long double>(keys(pos - tap)) *
             src[static_cast<std::size_t>(idx) * stride_in];
    }
    dst[j * stride_out] = static_cast<double>(acc);
  }
}

long double mean_ld(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

}  // namespace

Raster resize(const Raster& src, std::size_t dw, std::size_t dh) {
  Raster out(dw, dh, src.roles(), src.range());
  const std::size_t sw = src.width(), sh = src.height();
  std::vector<double> tmp(dw * sh);
  for (std::size_t b = 0; b < src.bands(); ++b) {
    const double* plane = src.band(b).data();
    for (std::size_t y = 0; y < sh; ++y) {
      resample_line(plane + y * sw, sw, 1, tmp.data() + y * dw, dw, 1);
    }
    double* o = out.band(b).data();
    for (std::size_t x = 0; x < dw; ++x) resample_line(tmp.data() + x, sh, dw, o + x, dh, dw);
  }
  return out;
}

double rmse_band(std::span<const double> f, std::span<const double> r) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const long double d = static_cast<long double>(f[i]) - r[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s / static_cast<long double>(f.size())));
}

double rmse(const Raster& f, const Raster& r) {
  long double s = 0.0L;
  for (std::size_t b = 0; b < r.bands(); ++b) s += rmse_band(f.band(b), r.band(b));
  return static_cast<double>(s / static_cast<long double>(r.bands()));
}

double rmae(const Raster& f, const Raster& r) {
  long double total = 0.0L;
  for (std::size_t b = 0; b < r.bands(); ++b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < r.plane_size(); ++i) {
      s += std::fabs(static_cast<long double>(f.band(b)[i]) - r.band(b)[i]);
    }
    total += 100.0L * (s / static_cast<long double>(r.plane_size())) / mean_ld(r.band(b));
  }
  return static_cast<double>(total / static_cast<long double>(r.bands()));
}

double ergas(const Raster& f, const Raster& r, int s) {
  long double acc = 0.0L;
  for (std::size_t b = 0; b < r.bands(); ++b) {
    const long double rel = rmse_band(f.band(b), r.band(b)) / mean_ld(r.band(b));
    acc += rel * rel;
  }
  return static_cast<double>(100.0L / s * std::sqrt(acc / static_cast<long double>(r.bands())));
}

double sam_degrees(const Raster& f, const Raster& r) {
  long double acc = 0.0L;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < r.plane_size(); ++i) {
    long double dot = 0.0L, nf = 0.0L, nr = 0.0L;
    for (std::size_t b = 0; b < r.bands(); ++b) {
      const long double x = f.band(b)[i], y = r.band(b)[i];
      dot += x * y;
      nf += x * x;
      nr += y * y;
    }
    if (nf == 0.0L || nr == 0.0L) continue;
    long double c = dot / (std::sqrt(nf) * std::sqrt(nr));
    c = std::clamp(c, -1.0L, 1.0L);
    acc += std::acos(c);
    ++valid;
  }
  return static_cast<double>(acc / static_cast<long double>(valid) * 180.0L /
                             3.141592653589793238462643383279502884L);
}

double q(std::span<const double> x, std::span<const double> y) {
  const long double n = static_cast<long double>(x.size());
  const long double mx = mean_ld(x), my = mean_ld(y);
  long double vx = 0.0L, vy = 0.0L, cxy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
    cxy += (x[i] - mx) * (y[i] - my);
  }
  vx /= n;
  vy /= n;
  cxy /= n;
  return static_cast<double>(4.0L * cxy * mx * my / ((vx + vy) * (mx * mx + my * my)));
}

double uiqi(const Raster& f, const Raster& r, std::size_t window) {
  long double total = 0.0L;
  for (std::size_t b = 0; b < r.bands(); ++b) {
    long double acc = 0.0L;
    std::size_t count = 0;
    for (std::size_t y0 = 0; y0 + window <= r.height(); ++y0) {
      for (std::size_t x0 = 0; x0 + window <= r.width(); ++x0) {
        std::vector<double> a, c;
        for (std::size_t y = y0; y < y0 + window; ++y) {
          for (std::size_t x = x0; x < x0 + window; ++x) {
            a.push_back(f.at(b, y, x));
            c.push_back(r.at(b, y, x));
          }
        }
        const double v = q(a, c);
        if (std::isfinite(v)) {
          acc += v;
          ++count;
        }
      }
    }
    total += acc / static_cast<long double>(count);
  }
  return static_cast<double>(total / static_cast<long double>(r.bands()));
}

double d_lambda(const Raster& f, const Raster& lrms) {
  const std::size_t c = f.bands();
  long double acc = 0.0L;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (i != j) acc += std::fabs(q(f.band(i), f.band(j)) - q(lrms.band(i), lrms.band(j)));
    }
  }
  return static_cast<double>(acc / static_cast<long double>(c * (c - 1)));
}

double d_s(const Raster& f, const Raster& lrms, const Raster& pan, const Raster& pan_low) {
  long double acc = 0.0L;
  for (std::size_t b = 0; b < f.bands(); ++b) {
    acc += std::fabs(q(f.band(b), pan.band(0)) - q(lrms.band(b), pan_low.band(0)));
  }
  return static_cast<double>(acc / static_cast<long double>(f.bands()));
}

double directional_fd(const std::function<double()>& loss, std::span<double> values,
                      std::span<const double> dir, double eps) {
  std::vector<double> saved(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = saved[i] + eps * dir[i];
  const double plus = loss();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = saved[i] - eps * dir[i];
  const double minus = loss();
  std::copy(saved.begin(), saved.end(), values.begin());
  return (plus - minus) / (2.0 * eps);
}

double coordinate_fd(const std::function<double()>& loss, std::span<double> values,
                     std::size_t i, double eps) {
  const double saved = values[i];
  values[i] = saved + eps;
  const double plus = loss();
  values[i] = saved - eps;
  const double minus = loss();
  values[i] = saved;
  return (plus - minus) / (2.0 * eps);
}

double relative_error(double a, double b, double floor) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

double exhaustive_agreement(const pansharp::isodata::LabelMap& a,
                            const pansharp::isodata::LabelMap& b) {
  const std::size_t ka = a.k_final, kb = b.k_final;
  // Map each class of the larger side onto a distinct class of the other
  // side or onto "unmatched"; enumerate permutations of kb slots.
  std::vector<std::size_t> perm(std::max(ka, kb));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      const std::size_t mapped = perm[a.labels[i]];
      if (mapped < kb && mapped == b.labels[i]) ++hits;
    }
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(a.labels.size());
}

double within_sse(const Raster& img, const std::vector<std::uint32_t>& labels, std::size_t k) {
  std::vector<std::vector<long double>> sum(k, std::vector<long double>(img.bands(), 0.0L));
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++count[labels[i]];
    for (std::size_t b = 0; b < img.bands(); ++b) sum[labels[i]][b] += img.band(b)[i];
  }
  long double sse = 0.0L;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t b = 0; b < img.bands(); ++b) {
      const long double m = sum[labels[i]][b] / static_cast<long double>(count[labels[i]]);
      const long double d = img.band(b)[i] - m;
      sse += d * d;
    }
  }
  return static_cast<double>(sse);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("pansharp_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle

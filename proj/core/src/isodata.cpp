#include "pansharp/isodata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pansharp/errors.hpp"

namespace pansharp::isodata {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

using Center = std::vector<double>;

class Pixels {
 public:
  explicit Pixels(const Raster& img)
      : n_(img.plane_size()), bands_(img.bands()), data_(n_ * bands_) {
    // Pixel-major copy: one contiguous spectral vector per pixel.
    for (std::size_t b = 0; b < bands_; ++b) {
      auto plane = img.band(b);
      for (std::size_t i = 0; i < n_; ++i) data_[i * bands_ + b] = plane[i];
    }
  }
  std::size_t size() const { return n_; }
  std::size_t bands() const { return bands_; }
  const double* operator[](std::size_t i) const { return data_.data() + i * bands_; }

 private:
  std::size_t n_;
  std::size_t bands_;
  std::vector<double> data_;
};

double dist2(const double* x, const Center& c) {
  double s = 0.0;
  for (std::size_t b = 0; b < c.size(); ++b) s += (x[b] - c[b]) * (x[b] - c[b]);
  return s;
}

// Nearest center, ties to the lowest id. Returns number of changed labels.
std::size_t assign(const Pixels& px, const std::vector<Center>& centers,
                   std::vector<std::uint32_t>& labels) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    std::uint32_t best = 0;
    double best_d = dist2(px[i], centers[0]);
    for (std::uint32_t k = 1; k < centers.size(); ++k) {
      const double d = dist2(px[i], centers[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (labels[i] != best) {
      labels[i] = best;
      ++changed;
    }
  }
  return changed;
}

double sse(const Pixels& px, const std::vector<Center>& centers,
           const std::vector<std::uint32_t>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) s += dist2(px[i], centers[labels[i]]);
  return s;
}

// Recomputes means of non-empty clusters; returns cluster sizes.
std::vector<std::size_t> update(const Pixels& px, std::vector<Center>& centers,
                                const std::vector<std::uint32_t>& labels) {
  const std::size_t k = centers.size();
  std::vector<std::size_t> sizes(k, 0);
  std::vector<Center> sums(k, Center(px.bands(), 0.0));
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto l = labels[i];
    ++sizes[l];
    for (std::size_t b = 0; b < px.bands(); ++b) sums[l][b] += px[i][b];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) continue;
    for (std::size_t b = 0; b < px.bands(); ++b) {
      centers[c][b] = sums[c][b] / static_cast<double>(sizes[c]);
    }
  }
  return sizes;
}

std::vector<Center> per_cluster_std(const Pixels& px, const std::vector<Center>& centers,
                                    const std::vector<std::uint32_t>& labels,
                                    const std::vector<std::size_t>& sizes) {
  std::vector<Center> var(centers.size(), Center(px.bands(), 0.0));
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto l = labels[i];
    for (std::size_t b = 0; b < px.bands(); ++b) {
      const double d = px[i][b] - centers[l][b];
      var[l][b] += d * d;
    }
  }
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (double& v : var[c]) v = sizes[c] ? std::sqrt(v / static_cast<double>(sizes[c])) : 0.0;
  }
  return var;
}

}  // namespace

IsodataParams IsodataParams::for_range(const ValueRange& range) {
  IsodataParams p;
  p.split_std_threshold = 0.15 * range.span();
  p.merge_dist_threshold = 0.05 * range.span();
  return p;
}

void IsodataParams::validate() const {
  if (k_init < 2) throw InvalidArgument("isodata: k_init must be >= 2");
  if (max_iter < 1) throw InvalidArgument("isodata: max_iter must be >= 1");
  if (split_std_threshold < 0.0 || merge_dist_threshold < 0.0) {
    throw InvalidArgument("isodata: thresholds must be non-negative");
  }
}

LabelMap classify(const Raster& image, const IsodataParams& p, IsodataTrace* trace) {
  p.validate();
  if (image.empty()) throw InvalidArgument("isodata: empty image");
  const Pixels px(image);
  const std::size_t bands = px.bands();

  // Even spread on the segment between the per-band minimum and maximum.
  Center lo(bands, std::numeric_limits<double>::infinity());
  Center hi(bands, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t b = 0; b < bands; ++b) {
      lo[b] = std::min(lo[b], px[i][b]);
      hi[b] = std::max(hi[b], px[i][b]);
    }
  }
  std::vector<Center> centers(p.k_init, Center(bands));
  for (std::size_t k = 0; k < p.k_init; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(p.k_init - 1);
    for (std::size_t b = 0; b < bands; ++b) centers[k][b] = lo[b] + t * (hi[b] - lo[b]);
  }

  std::vector<std::uint32_t> labels(px.size(), kUnassigned);
  bool restructured = true;
  for (std::size_t iter = 0; iter < p.max_iter; ++iter) {
    IsodataTrace::Iteration rec;
    rec.changed = assign(px, centers, labels);
    rec.sse_after_assign = sse(px, centers, labels);
    if (rec.changed == 0 && !restructured) {
      rec.sse_after_update = rec.sse_after_assign;
      rec.k_before_split_merge = rec.k_after = centers.size();
      if (trace) trace->iterations.push_back(rec);
      break;
    }
    auto sizes = update(px, centers, labels);
    rec.sse_after_update = sse(px, centers, labels);
    restructured = false;

    // Discard undersized clusters, always keeping at least the largest one.
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (sizes[c] >= p.min_cluster_size) keep.push_back(c);
    }
    if (keep.empty()) {
      keep.push_back(static_cast<std::size_t>(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin()));
    }
    if (keep.size() != centers.size()) {
      std::vector<Center> kept;
      for (std::size_t c : keep) kept.push_back(centers[c]);
      centers = std::move(kept);
      std::fill(labels.begin(), labels.end(), kUnassigned);
      assign(px, centers, labels);
      sizes = update(px, centers, labels);
      restructured = true;
    }
    rec.k_before_split_merge = centers.size();

    // Split clusters with a wide spread along their widest band.
    bool split = false;
    if (centers.size() < 2 * p.k_init) {
      const auto stds = per_cluster_std(px, centers, labels, sizes);
      const std::size_t existing = centers.size();
      for (std::size_t c = 0; c < existing && centers.size() < 2 * p.k_init; ++c) {
        const auto widest = static_cast<std::size_t>(
            std::max_element(stds[c].begin(), stds[c].end()) - stds[c].begin());
        const double sigma = stds[c][widest];
        if (sigma > p.split_std_threshold && sizes[c] >= 2 * p.min_cluster_size) {
          Center plus = centers[c];
          plus[widest] += sigma;
          centers[c][widest] -= sigma;
          centers.push_back(std::move(plus));
          split = true;
        }
      }
    }

    // Merge close pairs when nothing was split this iteration.
    if (!split && 2 * centers.size() > p.k_init) {
      struct Pair {
        double d;
        std::size_t i, j;
      };
      std::vector<Pair> pairs;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
          const double d = std::sqrt(dist2(centers[i].data(), centers[j]));
          if (d < p.merge_dist_threshold) pairs.push_back({d, i, j});
        }
      }
      std::stable_sort(pairs.begin(), pairs.end(),
                       [](const Pair& a, const Pair& b) { return a.d < b.d; });
      std::vector<bool> merged(centers.size(), false);
      std::vector<bool> removed(centers.size(), false);
      std::size_t k = centers.size();
      for (const Pair& pr : pairs) {
        if (2 * k <= p.k_init) break;
        if (merged[pr.i] || merged[pr.j]) continue;
        const double wi = static_cast<double>(std::max<std::size_t>(sizes[pr.i], 1));
        const double wj = static_cast<double>(std::max<std::size_t>(sizes[pr.j], 1));
        for (std::size_t b = 0; b < bands; ++b) {
          centers[pr.i][b] = (wi * centers[pr.i][b] + wj * centers[pr.j][b]) / (wi + wj);
        }
        merged[pr.i] = merged[pr.j] = true;
        removed[pr.j] = true;
        --k;
      }
      if (k != centers.size()) {
        std::vector<Center> kept;
        for (std::size_t c = 0; c < centers.size(); ++c) {
          if (!removed[c]) kept.push_back(centers[c]);
        }
        centers = std::move(kept);
        restructured = true;
      }
    }
    if (split) restructured = true;
    if (restructured) std::fill(labels.begin(), labels.end(), kUnassigned);
    rec.k_after = centers.size();
    if (trace) trace->iterations.push_back(rec);
  }

  // Final assignment, then compact away empty classes.
  std::fill(labels.begin(), labels.end(), kUnassigned);
  assign(px, centers, labels);
  const auto sizes = update(px, centers, labels);
  std::vector<std::uint32_t> remap(centers.size(), kUnassigned);
  LabelMap out;
  out.width = image.width();
  out.height = image.height();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (sizes[c] == 0) continue;
    remap[c] = static_cast<std::uint32_t>(out.centers.size());
    out.centers.push_back(centers[c]);
  }
  out.k_final = out.centers.size();
  out.labels.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out.labels[i] = remap[labels[i]];
  return out;
}

double agreement(const LabelMap& a, const LabelMap& b) {
  if (a.width != b.width || a.height != b.height || a.labels.size() != b.labels.size()) {
    throw ShapeError("agreement: label maps differ in size");
  }
  if (a.labels.empty()) throw InvalidArgument("agreement: empty label maps");
  const std::size_t ka = a.k_final;
  const std::size_t kb = b.k_final;
  std::vector<std::size_t> confusion(ka * kb, 0);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    if (a.labels[i] >= ka || b.labels[i] >= kb) {
      throw InvalidArgument("agreement: label outside [0, k_final)");
    }
    ++confusion[a.labels[i] * kb + b.labels[i]];
  }
  std::vector<bool> row_used(ka, false), col_used(kb, false);
  std::size_t matched = 0;
  for (std::size_t round = 0; round < std::min(ka, kb); ++round) {
    std::size_t best = 0, bi = ka, bj = kb;
    for (std::size_t i = 0; i < ka; ++i) {
      if (row_used[i]) continue;
      for (std::size_t j = 0; j < kb; ++j) {
        if (col_used[j]) continue;
        const std::size_t v = confusion[i * kb + j];
        if (bi == ka || v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = col_used[bj] = true;
    matched += best;
  }
  return static_cast<double>(matched) / static_cast<double>(a.labels.size());
}

}  // namespace pansharp::isodata

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pansharp/raster.hpp"

namespace pansharp::isodata {

struct IsodataParams {
  std::size_t k_init = 5;
  std::size_t max_iter = 5;
  std::size_t min_cluster_size = 20;
  double split_std_threshold = 0.15 * 2047.0;
  double merge_dist_threshold = 0.05 * 2047.0;
  /// Recorded for reproducibility; the evenly spread initialization and the
  /// lowest-id tie-break make the current algorithm seed-independent.
  std::uint64_t seed = 0;

  /// Defaults with thresholds scaled to a value range (15% and 5% of it).
  static IsodataParams for_range(const ValueRange& range);
  void validate() const;
};

struct LabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> labels;
  std::size_t k_final = 0;
  std::vector<std::vector<double>> centers;  // k_final spectral means

  bool operator==(const LabelMap&) const = default;
};

/// Within-cluster sum of squares observed after each assign and update
/// sub-step, in order, for every iteration.
struct IsodataTrace {
  struct Iteration {
    double sse_after_assign = 0.0;
    double sse_after_update = 0.0;
    std::size_t k_before_split_merge = 0;
    std::size_t k_after = 0;
    std::size_t changed = 0;
  };
  std::vector<Iteration> iterations;
};

LabelMap classify(const Raster& image, const IsodataParams& params,
                  IsodataTrace* trace = nullptr);

/// Fraction of pixels on which two label maps agree after matching labels
/// greedily on the confusion matrix (largest cell first).
double agreement(const LabelMap& a, const LabelMap& b);

}  // namespace pansharp::isodata

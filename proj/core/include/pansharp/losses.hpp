#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pansharp/parameters.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/tensor.hpp"

namespace pansharp::losses {

/// Seed of the built-in random feature extractor. Changing it changes every
/// perceptual loss value; keep it frozen.
inline constexpr std::uint64_t kDefaultPhiSeed = 0x4E495256ULL;  // "NIRV"

/// Fixed convolutional feature stack for the NIR perceptual loss:
/// three [conv3x3 stride 2, relu] blocks, channels 1 -> 16 -> 32 -> 64.
/// Its parameters never require gradients.
class FeatureExtractor {
 public:
  /// Seeded He-uniform weights, zero biases.
  static FeatureExtractor seeded(std::uint64_t seed = kDefaultPhiSeed);
  /// Weights from an HMW1 file with names phi.block{0,1,2}.{weight,bias}.
  static FeatureExtractor from_file(const std::filesystem::path& path);
  static FeatureExtractor from_parameters(ParameterSet params);

  /// Deepest block's feature maps for a (n, 1, H, W) input.
  Tensor features(Tape& tape, const Tensor& nir) const;

  const ParameterSet& parameters() const { return params_; }

 private:
  explicit FeatureExtractor(ParameterSet params);
  ParameterSet params_;
};

struct LossWeights {
  double alpha = 1e-3;
  /// Perceptual term on the x4 output only (true) or on both stages.
  bool stage2_only_perceptual = true;
};

/// Mean squared error over every element.
Tensor pixel_loss(Tape& tape, const Tensor& fused, const Tensor& target);

/// MSE between phi(NIR(fused)) and phi(NIR(target)). `roles` names the
/// channels; a missing NIR role is a ConfigError.
Tensor nir_perceptual_loss(Tape& tape, const Tensor& fused, const Tensor& target,
                           const FeatureExtractor& phi,
                           std::span<const BandRole> roles = {});

struct LossTerms {
  Tensor pixel;       // pixel loss summed over both stages
  Tensor perceptual;  // NIR perceptual loss (summed over supervised stages)
  Tensor total;       // alpha * perceptual + pixel
};

/// alpha * L_perceptual + L_pixel with deep supervision of both stages:
/// pixel = MSE(fused_x4, hrms) + MSE(fused_x2, downsample(hrms, 2)).
LossTerms total_loss(Tape& tape, const Tensor& fused_x2, const Tensor& fused_x4,
                     const Tensor& hrms, const FeatureExtractor& phi, const LossWeights& w);

/// Scalar form of the weighted sum, for reporting.
double combine(double pixel, double perceptual, double alpha);

}  // namespace pansharp::losses

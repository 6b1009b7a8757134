#include "pansharp/losses.hpp"

#include <algorithm>
#include <string>

#include "pansharp/errors.hpp"
#include "pansharp/init.hpp"
#include "pansharp/ops.hpp"

namespace pansharp::losses {

namespace {

constexpr std::uint32_t kPhiChannels[4] = {1, 16, 32, 64};

std::string block_name(int i) { return "phi.block" + std::to_string(i); }

std::size_t nir_channel(std::size_t channels, std::span<const BandRole> roles) {
  if (roles.empty()) {
    const auto canonical = rgbn_roles();
    if (channels != canonical.size()) {
      throw ConfigError("nir_perceptual_loss: no band roles given and channel count is not 4");
    }
    return 3;
  }
  if (roles.size() != channels) {
    throw ConfigError("nir_perceptual_loss: role list does not match the channel count");
  }
  auto it = std::find(roles.begin(), roles.end(), BandRole::Nir);
  if (it == roles.end()) throw ConfigError("nir_perceptual_loss: inputs carry no NIR band");
  return static_cast<std::size_t>(it - roles.begin());
}

}  // namespace

FeatureExtractor::FeatureExtractor(ParameterSet params) : params_(std::move(params)) {
  for (int i = 0; i < 3; ++i) {
    const auto& w = params_.entry(block_name(i) + ".weight");
    const auto& b = params_.entry(block_name(i) + ".bias");
    const std::vector<std::uint32_t> wd{kPhiChannels[i + 1], kPhiChannels[i], 3, 3};
    const std::vector<std::uint32_t> bd{kPhiChannels[i + 1]};
    if (w.dims != wd || b.dims != bd) {
      throw WeightFileError("feature extractor block " + std::to_string(i) +
                            " has unexpected dimensions");
    }
  }
  params_.set_requires_grad(false);
}

FeatureExtractor FeatureExtractor::seeded(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  ParameterSet p;
  for (int i = 0; i < 3; ++i) {
    const std::uint32_t out = kPhiChannels[i + 1];
    const std::uint32_t in = kPhiChannels[i];
    p.add(block_name(i) + ".weight", {out, in, 3, 3},
          seeded_init(Shape{out, in, 3, 3}, rng, InitScheme::HeUniform));
    p.add(block_name(i) + ".bias", {out}, seeded_init(Shape{out, 1, 1, 1}, rng, InitScheme::Zeros));
  }
  return FeatureExtractor(std::move(p));
}

FeatureExtractor FeatureExtractor::from_file(const std::filesystem::path& path) {
  return FeatureExtractor(load_weights(path));
}

FeatureExtractor FeatureExtractor::from_parameters(ParameterSet params) {
  return FeatureExtractor(std::move(params));
}

Tensor FeatureExtractor::features(Tape& tape, const Tensor& nir) const {
  if (nir.shape().c != 1) throw ShapeError("feature extractor expects a single channel input");
  Tensor x = nir;
  for (int i = 0; i < 3; ++i) {
    x = ops::relu(tape, ops::conv2d(tape, x, params_.at(block_name(i) + ".weight"),
                                    params_.at(block_name(i) + ".bias"), ops::ConvOptions{2, 1}));
  }
  return x;
}

Tensor pixel_loss(Tape& tape, const Tensor& fused, const Tensor& target) {
  if (fused.shape() != target.shape()) {
    throw ShapeError("pixel_loss: " + fused.shape().str() + " vs " + target.shape().str());
  }
  return ops::mse(tape, fused, target);
}

Tensor nir_perceptual_loss(Tape& tape, const Tensor& fused, const Tensor& target,
                           const FeatureExtractor& phi, std::span<const BandRole> roles) {
  if (fused.shape() != target.shape()) {
    throw ShapeError("nir_perceptual_loss: " + fused.shape().str() + " vs " +
                     target.shape().str());
  }
  const std::size_t nir = nir_channel(fused.shape().c, roles);
  Tensor f = phi.features(tape, ops::slice_channels(tape, fused, nir, 1));
  Tensor t = phi.features(tape, ops::slice_channels(tape, target, nir, 1));
  return ops::mse(tape, f, t);
}

LossTerms total_loss(Tape& tape, const Tensor& fused_x2, const Tensor& fused_x4,
                     const Tensor& hrms, const FeatureExtractor& phi, const LossWeights& w) {
  if (w.alpha < 0.0) throw ConfigError("loss.alpha must be >= 0");
  const Shape& hs = hrms.shape();
  if (hs.h % 2 != 0 || hs.w % 2 != 0) {
    throw ShapeError("total_loss: HRMS extent must be even, got " + hs.str());
  }
  const Tensor hrms_x2 = ops::resize_bicubic(tape, hrms, hs.h / 2, hs.w / 2);
  LossTerms t;
  t.pixel = ops::add(tape, pixel_loss(tape, fused_x4, hrms), pixel_loss(tape, fused_x2, hrms_x2));
  t.perceptual = nir_perceptual_loss(tape, fused_x4, hrms, phi);
  if (!w.stage2_only_perceptual) {
    t.perceptual = ops::add(tape, t.perceptual, nir_perceptual_loss(tape, fused_x2, hrms_x2, phi));
  }
  t.total = ops::add(tape, ops::scalar_mul(tape, t.perceptual, w.alpha), t.pixel);
  return t;
}

double combine(double pixel, double perceptual, double alpha) { return alpha * perceptual + pixel; }

}  // namespace pansharp::losses

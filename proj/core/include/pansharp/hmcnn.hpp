#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pansharp/parameters.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/tensor.hpp"

namespace pansharp::hmcnn {

/// Number of spectral bands the network is built for (R, G, B, NIR).
inline constexpr std::size_t kBands = 4;

struct HmcnnConfig {
  std::size_t n_res_blocks = 11;
  std::size_t feat_channels = 32;
  bool share_hmb_across_bands = true;
  /// Stage 2 consumes the upsampled stage-1 fusion (true) or the ×4
  /// bicubic upsampled LRMS (false).
  bool progressive_chain = true;
  int s = 4;
  std::size_t attention_hidden = 16;

  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

/// Names of the per-band HMB parameter groups, in role order.
const std::vector<std::string>& band_tags();

/// Builds a complete, freshly initialized parameter set (He-uniform
/// convolution weights, zero biases) from one seeded stream.
ParameterSet init_weights(const HmcnnConfig& config, std::uint64_t seed);

/// Verifies that `weights` holds every parameter `config` needs with the
/// right dimensions. Throws WeightFileError otherwise.
void check_weights(const ParameterSet& weights, const HmcnnConfig& config);

struct ResBlockParams {
  Tensor w1, b1, w2, b2;
};

/// One high-pass modification block: residual trunk on concat(X, P) and a
/// 1-channel spatial attention head.
struct HmbParams {
  Tensor entry_w, entry_b;
  std::vector<ResBlockParams> blocks;
  Tensor sa1_w, sa1_b, sa2_w, sa2_b;

  static HmbParams bind(const ParameterSet& weights, const std::string& prefix,
                        const HmcnnConfig& config);
};

/// Parameters of one stage's HMB: one group shared by all bands or one per band.
struct StageHmb {
  std::vector<HmbParams> per_band;  // size 1 when shared

  const HmbParams& for_band(std::size_t b) const {
    return per_band.size() == 1 ? per_band.front() : per_band.at(b);
  }
  static StageHmb bind(const ParameterSet& weights, const std::string& stage,
                       const HmcnnConfig& config);
};

/// Residual trunk output for one band (feat_channels maps).
Tensor residual_trunk(Tape& tape, const Tensor& band_x, const Tensor& pan, const HmbParams& p);

/// Spatial attention map in (0, 1), one channel.
Tensor spatial_attention(Tape& tape, const Tensor& features, const HmbParams& p);

/// X_hat = (attention(trunk(concat(X, P))) + 1) * highpass(P, s).
Tensor hmb_forward(Tape& tape, const Tensor& band_x, const Tensor& pan, const HmbParams& p,
                   std::size_t s);

/// Applies hmb_forward to each of the four band slices of `features` and
/// concatenates the results in band order.
Tensor hmb_fuse(Tape& tape, const Tensor& features, const Tensor& pan, const StageHmb& stage,
                std::size_t s);

/// CNN feature extractors. f1 doubles the spatial size.
Tensor extractor_f1(Tape& tape, const Tensor& lrms, const ParameterSet& weights);
Tensor extractor_f2(Tape& tape, const Tensor& x, const ParameterSet& weights);

struct ForwardResult {
  Tensor feature_x2;   // f1(lrms)
  Tensor residual_x2;  // hmb_fuse(feature_x2, pan at x2)
  Tensor fused_x2;     // feature_x2 + residual_x2
  Tensor feature_x4;   // f2(stage-2 input)
  Tensor residual_x4;  // hmb_fuse(feature_x4, pan)
  Tensor fused_x4;     // feature_x4 + residual_x4
};

/// Two-stage progressive fusion. lrms is (n, 4, h, w), pan (n, 1, 4h, 4w),
/// both normalized.
ForwardResult forward(Tape& tape, const Tensor& lrms, const Tensor& pan,
                      const ParameterSet& weights, const HmcnnConfig& config);

/// Highpass factor used inside the HMB of stage 1 and stage 2.
std::size_t stage_highpass_factor(const HmcnnConfig& config, int stage);

// --- raster inference --------------------------------------------------

/// Raster -> (1, bands, h, w) tensor with values mapped to [0, 1] by the
/// raster's value range.
Tensor to_tensor(const Raster& r);
/// Stacks several equally shaped rasters along the batch axis.
Tensor stack_to_tensor(const std::vector<const Raster*>& rasters);
/// Sample `index` of t, denormalized with `range`.
Raster to_raster(const Tensor& t, std::size_t index, std::vector<BandRole> roles,
                 ValueRange range);

struct PredictOptions {
  /// Tile edge in PAN pixels; larger inputs are processed tile by tile.
  std::size_t tile = 256;
  /// Minimum context kept on each side of a tile seam, in PAN pixels.
  std::size_t overlap = 16;
};

/// Tile start offsets along an axis and the seam positions where
/// ownership passes from one tile to the next.
struct AxisTiling {
  std::vector<std::size_t> starts;
  std::vector<std::size_t> bounds;  // size = starts.size() + 1, [0 .. length]
  std::size_t tile = 0;
};
AxisTiling plan_axis(std::size_t length, std::size_t tile, std::size_t overlap, std::size_t align);

Raster predict(const Raster& lrms, const Raster& pan, const ParameterSet& weights,
               const HmcnnConfig& config, const PredictOptions& options = {});
Raster predict(const Raster& lrms, const Raster& pan, const std::filesystem::path& weights_path,
               const HmcnnConfig& config, const PredictOptions& options = {});

}  // namespace pansharp::hmcnn

#include "pansharp/hmcnn.hpp"

#include <algorithm>
#include <utility>

#include "pansharp/errors.hpp"
#include "pansharp/init.hpp"
#include "pansharp/ops.hpp"

namespace pansharp::hmcnn {

namespace {

constexpr std::size_t kExtractorBlocks = 2;

struct ConvSpec {
  std::string name;  // without ".weight"/".bias"
  std::uint32_t out_c;
  std::uint32_t in_c;
  // Multiplies the He-uniform draw. Residual branches and extractor tails
  // start small so f1/f2 begin near their bicubic skip paths.
  double gain = 1.0;
};

constexpr double kResidualGain = 0.1;

std::vector<ConvSpec> conv_specs(const HmcnnConfig& c) {
  const auto feat = static_cast<std::uint32_t>(c.feat_channels);
  const auto bands = static_cast<std::uint32_t>(kBands);
  const auto hidden = static_cast<std::uint32_t>(c.attention_hidden);
  std::vector<ConvSpec> specs;
  auto extractor = [&](const std::string& f, bool upsampler) {
    specs.push_back({f + ".head", feat, bands});
    for (std::size_t i = 0; i < kExtractorBlocks; ++i) {
      const std::string block = f + ".res" + std::to_string(i);
      specs.push_back({block + ".conv1", feat, feat});
      specs.push_back({block + ".conv2", feat, feat, kResidualGain});
    }
    if (upsampler) specs.push_back({f + ".up", feat, feat});
    specs.push_back({f + ".tail", bands, feat, kResidualGain});
  };
  auto hmb = [&](const std::string& prefix) {
    specs.push_back({prefix + ".entry", feat, 2});
    for (std::size_t i = 0; i < c.n_res_blocks; ++i) {
      const std::string block = prefix + ".res" + std::to_string(i);
      specs.push_back({block + ".conv1", feat, feat});
      specs.push_back({block + ".conv2", feat, feat, kResidualGain});
    }
    specs.push_back({prefix + ".sa.conv1", hidden, feat});
    specs.push_back({prefix + ".sa.conv2", 1, hidden});
  };
  extractor("f1", true);
  extractor("f2", false);
  for (const char* stage : {"stage1", "stage2"}) {
    if (c.share_hmb_across_bands) {
      hmb(std::string(stage) + ".hmb");
    } else {
      for (const auto& tag : band_tags()) hmb(std::string(stage) + ".hmb." + tag);
    }
  }
  return specs;
}

Tensor conv(Tape& tape, const Tensor& x, const ParameterSet& w, const std::string& name,
            std::size_t stride = 1) {
  return ops::conv2d(tape, x, w.at(name + ".weight"), w.at(name + ".bias"),
                     ops::ConvOptions{stride, 1});
}

Tensor res_block(Tape& tape, const Tensor& x, const ParameterSet& w, const std::string& name) {
  Tensor h = ops::relu(tape, conv(tape, x, w, name + ".conv1"));
  return ops::add(tape, x, conv(tape, h, w, name + ".conv2"));
}

Tensor res_block(Tape& tape, const Tensor& x, const ResBlockParams& p) {
  Tensor h = ops::relu(tape, ops::conv2d(tape, x, p.w1, p.b1));
  return ops::add(tape, x, ops::conv2d(tape, h, p.w2, p.b2));
}

}  // namespace

void HmcnnConfig::validate() const {
  if (n_res_blocks < 1) throw ConfigError("model.n_res_blocks must be >= 1");
  if (feat_channels < kBands) {
    throw ConfigError("model.feat_channels must be >= the band count (4)");
  }
  if (attention_hidden < 1) throw ConfigError("model.attention_hidden must be >= 1");
  if (s != 4) throw ConfigError("the two-stage network requires s = 4");
}

const std::vector<std::string>& band_tags() {
  static const std::vector<std::string> tags{"R", "G", "B", "NIR"};
  return tags;
}

ParameterSet init_weights(const HmcnnConfig& config, std::uint64_t seed) {
  config.validate();
  Xoshiro256 rng(seed);
  ParameterSet params;
  for (const auto& spec : conv_specs(config)) {
    const Shape ws{spec.out_c, spec.in_c, 3, 3};
    Tensor w = seeded_init(ws, rng, InitScheme::HeUniform);
    if (spec.gain != 1.0) {
      for (double& v : w.mutable_values()) v *= spec.gain;
    }
    params.add(spec.name + ".weight", {spec.out_c, spec.in_c, 3, 3}, std::move(w));
    params.add(spec.name + ".bias", {spec.out_c},
               seeded_init(Shape{spec.out_c, 1, 1, 1}, rng, InitScheme::Zeros));
  }
  return params;
}

void check_weights(const ParameterSet& weights, const HmcnnConfig& config) {
  config.validate();
  for (const auto& spec : conv_specs(config)) {
    const NamedParameter& w = weights.entry(spec.name + ".weight");
    const NamedParameter& b = weights.entry(spec.name + ".bias");
    const std::vector<std::uint32_t> wd{spec.out_c, spec.in_c, 3, 3};
    const std::vector<std::uint32_t> bd{spec.out_c};
    if (w.dims != wd || b.dims != bd) {
      throw WeightFileError("parameter " + spec.name +
                            " has dimensions that do not match the model configuration");
    }
  }
}

HmbParams HmbParams::bind(const ParameterSet& w, const std::string& prefix,
                          const HmcnnConfig& config) {
  HmbParams p;
  p.entry_w = w.at(prefix + ".entry.weight");
  p.entry_b = w.at(prefix + ".entry.bias");
  for (std::size_t i = 0; i < config.n_res_blocks; ++i) {
    const std::string block = prefix + ".res" + std::to_string(i);
    p.blocks.push_back({w.at(block + ".conv1.weight"), w.at(block + ".conv1.bias"),
                        w.at(block + ".conv2.weight"), w.at(block + ".conv2.bias")});
  }
  p.sa1_w = w.at(prefix + ".sa.conv1.weight");
  p.sa1_b = w.at(prefix + ".sa.conv1.bias");
  p.sa2_w = w.at(prefix + ".sa.conv2.weight");
  p.sa2_b = w.at(prefix + ".sa.conv2.bias");
  return p;
}

StageHmb StageHmb::bind(const ParameterSet& w, const std::string& stage,
                        const HmcnnConfig& config) {
  StageHmb s;
  if (config.share_hmb_across_bands) {
    s.per_band.push_back(HmbParams::bind(w, stage + ".hmb", config));
  } else {
    for (const auto& tag : band_tags()) {
      s.per_band.push_back(HmbParams::bind(w, stage + ".hmb." + tag, config));
    }
  }
  return s;
}

// --- HMB ---------------------------------------------------------------

Tensor residual_trunk(Tape& tape, const Tensor& band_x, const Tensor& pan, const HmbParams& p) {
  const Tensor pair[2] = {band_x, pan};
  Tensor f = ops::conv2d(tape, ops::concat_channels(tape, pair), p.entry_w, p.entry_b);
  for (const auto& block : p.blocks) f = res_block(tape, f, block);
  return f;
}

Tensor spatial_attention(Tape& tape, const Tensor& features, const HmbParams& p) {
  Tensor h = ops::relu(tape, ops::conv2d(tape, features, p.sa1_w, p.sa1_b));
  return ops::sigmoid(tape, ops::conv2d(tape, h, p.sa2_w, p.sa2_b));
}

Tensor hmb_forward(Tape& tape, const Tensor& band_x, const Tensor& pan, const HmbParams& p,
                   std::size_t s) {
  const Shape& xs = band_x.shape();
  const Shape& ps = pan.shape();
  if (xs.c != 1 || ps.c != 1 || xs.n != ps.n || xs.h != ps.h || xs.w != ps.w) {
    throw ShapeError("hmb_forward: band " + xs.str() + " and PAN " + ps.str() +
                     " must both be (n,1,H,W) with equal extents");
  }
  Tensor features = residual_trunk(tape, band_x, pan, p);
  Tensor gate = ops::add_scalar(tape, spatial_attention(tape, features, p), 1.0);
  Tensor detail = ops::highpass(tape, pan, s);
  return ops::mul(tape, gate, detail);
}

Tensor hmb_fuse(Tape& tape, const Tensor& features, const Tensor& pan, const StageHmb& stage,
                std::size_t s) {
  if (features.shape().c != kBands) {
    throw ConfigError("hmb_fuse: expected 4 feature bands (R, G, B, NIR), got " +
                      features.shape().str());
  }
  if (stage.per_band.size() != 1 && stage.per_band.size() != kBands) {
    throw ConfigError("hmb_fuse: stage must carry 1 shared or 4 per-band parameter groups");
  }
  std::vector<Tensor> outputs;
  outputs.reserve(kBands);
  for (std::size_t b = 0; b < kBands; ++b) {
    Tensor band = ops::slice_channels(tape, features, b, 1);
    outputs.push_back(hmb_forward(tape, band, pan, stage.for_band(b), s));
  }
  return ops::concat_channels(tape, outputs);
}

// --- feature extractors ------------------------------------------------

Tensor extractor_f1(Tape& tape, const Tensor& lrms, const ParameterSet& w) {
  const Shape& xs = lrms.shape();
  Tensor f = conv(tape, lrms, w, "f1.head");
  for (std::size_t i = 0; i < kExtractorBlocks; ++i) {
    f = res_block(tape, f, w, "f1.res" + std::to_string(i));
  }
  f = ops::resize_bicubic(tape, f, 2 * xs.h, 2 * xs.w);
  f = ops::relu(tape, conv(tape, f, w, "f1.up"));
  Tensor detail = conv(tape, f, w, "f1.tail");
  return ops::add(tape, ops::resize_bicubic(tape, lrms, 2 * xs.h, 2 * xs.w), detail);
}

Tensor extractor_f2(Tape& tape, const Tensor& x, const ParameterSet& w) {
  Tensor f = conv(tape, x, w, "f2.head");
  for (std::size_t i = 0; i < kExtractorBlocks; ++i) {
    f = res_block(tape, f, w, "f2.res" + std::to_string(i));
  }
  return ops::add(tape, x, conv(tape, f, w, "f2.tail"));
}

// --- full network ------------------------------------------------------

std::size_t stage_highpass_factor(const HmcnnConfig& config, int stage) {
  if (stage == 1) return 2;
  return config.progressive_chain ? 2 : static_cast<std::size_t>(config.s);
}

ForwardResult forward(Tape& tape, const Tensor& lrms, const Tensor& pan,
                      const ParameterSet& weights, const HmcnnConfig& config) {
  config.validate();
  const Shape& ls = lrms.shape();
  const Shape& ps = pan.shape();
  if (ls.c != kBands) {
    throw ShapeError("forward: LRMS must have 4 bands, got " + ls.str());
  }
  if (ps.c != 1 || ps.n != ls.n || ps.h != 4 * ls.h || ps.w != 4 * ls.w) {
    throw ShapeError("forward: PAN " + ps.str() + " is not the x4 single-band companion of LRMS " +
                     ls.str());
  }
  const StageHmb stage1 = StageHmb::bind(weights, "stage1", config);
  const StageHmb stage2 = StageHmb::bind(weights, "stage2", config);

  ForwardResult r;
  const Tensor pan_x2 = ops::resize_bicubic(tape, pan, 2 * ls.h, 2 * ls.w);
  r.feature_x2 = extractor_f1(tape, lrms, weights);
  r.residual_x2 = hmb_fuse(tape, r.feature_x2, pan_x2, stage1, stage_highpass_factor(config, 1));
  r.fused_x2 = ops::add(tape, r.feature_x2, r.residual_x2);

  const Tensor stage2_input =
      config.progressive_chain ? ops::resize_bicubic(tape, r.fused_x2, ps.h, ps.w)
                               : ops::resize_bicubic(tape, lrms, ps.h, ps.w);
  r.feature_x4 = extractor_f2(tape, stage2_input, weights);
  r.residual_x4 = hmb_fuse(tape, r.feature_x4, pan, stage2, stage_highpass_factor(config, 2));
  r.fused_x4 = ops::add(tape, r.feature_x4, r.residual_x4);
  return r;
}

// --- raster <-> tensor -------------------------------------------------

Tensor to_tensor(const Raster& r) { return stack_to_tensor({&r}); }

Tensor stack_to_tensor(const std::vector<const Raster*>& rasters) {
  if (rasters.empty()) throw InvalidArgument("stack_to_tensor: no rasters");
  const Raster& first = *rasters.front();
  const Shape shape{rasters.size(), first.bands(), first.height(), first.width()};
  std::vector<double> values;
  values.reserve(shape.numel());
  for (const Raster* r : rasters) {
    if (!r->same_geometry(first)) {
      throw ShapeError("stack_to_tensor: " + r->describe() + " differs from " + first.describe());
    }
    const double lo = r->range().min;
    const double inv = 1.0 / r->range().span();
    for (double v : r->data()) values.push_back((v - lo) * inv);
  }
  return Tensor::from(shape, std::move(values));
}

Raster to_raster(const Tensor& t, std::size_t index, std::vector<BandRole> roles,
                 ValueRange range) {
  const Shape& s = t.shape();
  if (index >= s.n) throw InvalidArgument("to_raster: batch index out of range");
  if (roles.size() != s.c) throw ShapeError("to_raster: role count does not match channels");
  const std::size_t chunk = s.c * s.plane();
  const auto v = t.values().subspan(index * chunk, chunk);
  std::vector<double> data(chunk);
  for (std::size_t i = 0; i < chunk; ++i) data[i] = v[i] * range.span() + range.min;
  return Raster(s.w, s.h, std::move(roles), std::move(data), range);
}

// --- tiled inference ---------------------------------------------------

AxisTiling plan_axis(std::size_t length, std::size_t tile, std::size_t overlap,
                     std::size_t align) {
  AxisTiling t;
  if (length <= tile) {
    t.tile = length;
    t.starts = {0};
    t.bounds = {0, length};
    return t;
  }
  if (tile <= 2 * overlap || tile % align != 0 || (tile - 2 * overlap) % align != 0) {
    throw ConfigError("tile size must exceed twice the overlap, and both the tile and its "
                      "stride must be multiples of " + std::to_string(align));
  }
  t.tile = tile;
  const std::size_t step = tile - 2 * overlap;
  for (std::size_t start = 0;; start += step) {
    if (start + tile >= length) {
      t.starts.push_back(length - tile);
      break;
    }
    t.starts.push_back(start);
  }
  if (t.starts.size() >= 2 && t.starts[t.starts.size() - 1] == t.starts[t.starts.size() - 2]) {
    t.starts.pop_back();
  }
  t.bounds.push_back(0);
  for (std::size_t i = 0; i + 1 < t.starts.size(); ++i) {
    // Seam in the middle of the shared region [start_{i+1}, start_i + tile).
    const std::size_t seam = (t.starts[i + 1] + t.starts[i] + tile) / 2;
    t.bounds.push_back(seam);
  }
  t.bounds.push_back(length);
  return t;
}

namespace {

Raster crop_raster(const Raster& src, std::size_t x0, std::size_t y0, std::size_t w,
                   std::size_t h) {
  Raster out(w, h, src.roles(), src.range());
  for (std::size_t b = 0; b < src.bands(); ++b) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) out.at(b, y, x) = src.at(b, y0 + y, x0 + x);
    }
  }
  return out;
}

Raster predict_whole(const Raster& lrms, const Raster& pan, const ParameterSet& weights,
                     const HmcnnConfig& config) {
  Tape tape(false);
  ForwardResult r = forward(tape, to_tensor(lrms), to_tensor(pan), weights, config);
  return to_raster(r.fused_x4, 0, lrms.roles(), lrms.range());
}

}  // namespace

Raster predict(const Raster& lrms, const Raster& pan, const ParameterSet& weights,
               const HmcnnConfig& config, const PredictOptions& options) {
  config.validate();
  check_weights(weights, config);
  if (lrms.bands() != kBands) {
    throw ShapeError("predict: LRMS must have 4 bands, got " + lrms.describe());
  }
  const auto s = static_cast<std::size_t>(config.s);
  if (pan.bands() != 1 || pan.width() != s * lrms.width() || pan.height() != s * lrms.height()) {
    throw ShapeError("predict: PAN " + pan.describe() + " is not the x" + std::to_string(s) +
                     " companion of LRMS " + lrms.describe());
  }
  if (pan.width() <= options.tile && pan.height() <= options.tile) {
    return predict_whole(lrms, pan, weights, config);
  }
  const AxisTiling tx = plan_axis(pan.width(), options.tile, options.overlap, s);
  const AxisTiling ty = plan_axis(pan.height(), options.tile, options.overlap, s);
  Raster out(pan.width(), pan.height(), lrms.roles(), lrms.range());
  for (std::size_t iy = 0; iy < ty.starts.size(); ++iy) {
    for (std::size_t ix = 0; ix < tx.starts.size(); ++ix) {
      const std::size_t x0 = tx.starts[ix];
      const std::size_t y0 = ty.starts[iy];
      const Raster ms_tile = crop_raster(lrms, x0 / s, y0 / s, tx.tile / s, ty.tile / s);
      const Raster pan_tile = crop_raster(pan, x0, y0, tx.tile, ty.tile);
      const Raster fused = predict_whole(ms_tile, pan_tile, weights, config);
      for (std::size_t b = 0; b < out.bands(); ++b) {
        for (std::size_t y = ty.bounds[iy]; y < ty.bounds[iy + 1]; ++y) {
          for (std::size_t x = tx.bounds[ix]; x < tx.bounds[ix + 1]; ++x) {
            out.at(b, y, x) = fused.at(b, y - y0, x - x0);
          }
        }
      }
    }
  }
  return out;
}

Raster predict(const Raster& lrms, const Raster& pan, const std::filesystem::path& weights_path,
               const HmcnnConfig& config, const PredictOptions& options) {
  return predict(lrms, pan, load_weights(weights_path), config, options);
}

}  // namespace pansharp::hmcnn

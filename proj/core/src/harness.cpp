#include "pansharp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "pansharp/adam.hpp"
#include "pansharp/classical.hpp"
#include "pansharp/errors.hpp"
#include "pansharp/hmcnn.hpp"
#include "pansharp/losses.hpp"
#include "pansharp/rng.hpp"
#include "pansharp/synth.hpp"

namespace pansharp::harness {

using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

fs::path sidecar(const fs::path& out) {
  fs::path p = out;
  p += ".json";
  return p;
}

// Rasters and file names are reported together so a failing input is
// identifiable from the message alone.
Raster load(const fs::path& path) {
  try {
    return read_raster(path);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string patch_stem(const PatchOrigin& o) {
  return o.source_id + "_y" + std::to_string(o.y) + "_x" + std::to_string(o.x);
}

void degrade_into(const Raster& hrms, const Raster& pan, const DegradeOptions& options,
                  const fs::path& out_dir, std::vector<IndexEntry>& entries) {
  const ScaleFactor s(options.s);
  if (!(pan.width() == hrms.width() && pan.height() == hrms.height())) {
    throw ShapeError("degrade: PAN " + pan.describe() + " and HRMS " + hrms.describe() +
                     " must share one grid");
  }
  const PatchSet patches =
      crop_patches(hrms, pan, s, CropOptions{options.patch, options.stride, options.source_id});
  for (const PatchTriple& t : patches) {
    const std::string stem = patch_stem(t.origin);
    IndexEntry e{stem, stem + "_hrms.mbr", stem + "_pan.mbr", stem + "_lrms.mbr"};
    write_raster(t.hrms, out_dir / e.hrms);
    write_raster(t.pan, out_dir / e.pan);
    write_raster(t.lrms, out_dir / e.lrms);
    entries.push_back(std::move(e));
  }
}

struct Sample {
  std::string id;
  std::vector<double> lrms, pan, hrms;  // normalized
  Shape lrms_shape, pan_shape, hrms_shape;
};

Sample load_sample(const IndexEntry& e) {
  const Raster hrms = load(e.hrms);
  const Raster pan = load(e.pan);
  const Raster lrms = load(e.lrms);
  if (hrms.bands() != hmcnn::kBands || lrms.bands() != hmcnn::kBands || pan.bands() != 1 ||
      pan.width() != hrms.width() || pan.height() != hrms.height() ||
      lrms.width() * 4 != hrms.width() || lrms.height() * 4 != hrms.height()) {
    throw ShapeError("dataset entry " + e.id + ": inconsistent triple " + hrms.describe() + ", " +
                     pan.describe() + ", " + lrms.describe());
  }
  auto norm = [](const Raster& r) {
    const Tensor t = hmcnn::to_tensor(r);
    return std::pair{std::vector<double>(t.values().begin(), t.values().end()), t.shape()};
  };
  Sample s;
  s.id = e.id;
  std::tie(s.lrms, s.lrms_shape) = norm(lrms);
  std::tie(s.pan, s.pan_shape) = norm(pan);
  std::tie(s.hrms, s.hrms_shape) = norm(hrms);
  return s;
}

struct Batch {
  Tensor lrms, pan, hrms;
};

Batch make_batch(const std::vector<Sample>& samples, std::span<const std::size_t> idx) {
  auto stack = [&](auto field, auto shape_field) {
    Shape shape = samples[idx[0]].*shape_field;
    shape.n = idx.size();
    std::vector<double> v;
    v.reserve(shape.numel());
    for (std::size_t i : idx) {
      const Sample& s = samples[i];
      if ((s.*shape_field).c != shape.c || (s.*shape_field).h != shape.h ||
          (s.*shape_field).w != shape.w) {
        throw ShapeError("batch: sample " + s.id + " differs in size from " +
                         samples[idx[0]].id);
      }
      v.insert(v.end(), (s.*field).begin(), (s.*field).end());
    }
    return Tensor::from(shape, std::move(v));
  };
  return {stack(&Sample::lrms, &Sample::lrms_shape), stack(&Sample::pan, &Sample::pan_shape),
          stack(&Sample::hrms, &Sample::hrms_shape)};
}

double mean_loss(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx,
                 const ParameterSet& weights, const TrainConfig& cfg,
                 const losses::FeatureExtractor& phi) {
  double acc = 0.0;
  for (std::size_t i : idx) {
    const std::size_t one[1] = {i};
    const Batch b = make_batch(samples, one);
    Tape tape(false);
    const auto r = hmcnn::forward(tape, b.lrms, b.pan, weights, cfg.model);
    acc += losses::total_loss(tape, r.fused_x2, r.fused_x4, b.hrms, phi, cfg.loss).total.item();
  }
  return acc / static_cast<double>(idx.size());
}

bool all_finite(const ParameterSet& weights) {
  for (const auto& p : weights.items()) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) return false;
    }
  }
  return true;
}

json to_json(const std::vector<double>& v) { return json(v); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

const char* version() {
#ifdef PANSHARP_VERSION
  return PANSHARP_VERSION;
#else
  return "unknown";
#endif
}

// --- dataset index ------------------------------------------------------

void write_index(const fs::path& path, const std::vector<IndexEntry>& entries) {
  std::ostringstream os;
  os << "id\thrms\tpan\tlrms\n";
  for (const auto& e : entries) {
    os << e.id << '\t' << e.hrms.generic_string() << '\t' << e.pan.generic_string() << '\t'
       << e.lrms.generic_string() << '\n';
  }
  write_text(path, os.str());
}

std::vector<IndexEntry> read_index(const fs::path& path) {
  const std::string text = read_text(path);
  const fs::path base = path.parent_path();
  std::istringstream in(text);
  std::string line;
  std::vector<IndexEntry> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "id\thrms\tpan\tlrms") {
        throw FormatError(path.string() + ": index header must be 'id hrms pan lrms' (tab separated)",
                          0);
      }
      continue;
    }
    std::vector<std::string> cols;
    std::istringstream ls(line);
    std::string col;
    while (std::getline(ls, col, '\t')) cols.push_back(col);
    if (cols.size() != 4) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                            " must have 4 tab-separated fields",
                        0);
    }
    out.push_back({cols[0], base / cols[1], base / cols[2], base / cols[3]});
  }
  if (out.empty()) throw FormatError(path.string() + ": index lists no triples", 0);
  return out;
}

std::vector<IndexEntry> cmd_degrade(const fs::path& hrms_path, const fs::path& pan_path,
                                    const fs::path& out_dir, const DegradeOptions& options) {
  const Raster hrms = load(hrms_path);
  const Raster pan = load(pan_path);
  std::vector<IndexEntry> entries;
  degrade_into(hrms, pan, options, out_dir, entries);
  write_index(out_dir / kIndexFile, entries);
  return entries;
}

std::vector<IndexEntry> cmd_synth(const fs::path& out_dir, const SynthOptions& options) {
  std::vector<IndexEntry> entries;
  for (std::size_t i = 0; i < options.scenes; ++i) {
    SceneOptions so;
    so.width = so.height = options.size;
    so.seed = mix_seed(options.seed, i);
    const SyntheticScene scene = synthesize_scene(so);
    const std::string id = "scene" + std::to_string(i);
    write_raster(scene.hrms, out_dir / "scenes" / (id + "_hrms.mbr"));
    write_raster(scene.pan, out_dir / "scenes" / (id + "_pan.mbr"));
    DegradeOptions d;
    d.s = options.s;
    d.patch = d.stride = options.patch;
    d.source_id = id;
    degrade_into(scene.hrms, scene.pan, d, out_dir, entries);
  }
  write_index(out_dir / kIndexFile, entries);
  return entries;
}

// --- training -------------------------------------------------------------

Split split_indices(std::size_t n, double val_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = mix_seed(seed ^ 0x5350'4C49'5400ULL, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
  if (val_fraction > 0.0 && n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  Split s;
  s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::vector<std::size_t> epoch_order(const std::vector<std::size_t>& train, std::uint64_t seed,
                                     std::size_t epoch) {
  std::vector<std::size_t> order = train;
  Xoshiro256 rng(mix_seed(seed, 0x5348'0000ULL + epoch));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

TrainResult cmd_train(const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.data_index.empty()) throw ConfigError("data.index is required for training");
  const auto t_load = Clock::now();
  const auto entries = read_index(cfg.data_index);
  std::vector<Sample> samples;
  samples.reserve(entries.size());
  for (const auto& e : entries) samples.push_back(load_sample(e));
  const double load_s = seconds_since(t_load);

  const Split split = split_indices(samples.size(), cfg.val_fraction, cfg.seed);
  if (split.train.empty()) throw ConfigError("training split is empty");

  const losses::FeatureExtractor phi = cfg.phi_weights_path.empty()
                                           ? losses::FeatureExtractor::seeded(cfg.phi_seed)
                                           : losses::FeatureExtractor::from_file(cfg.phi_weights_path);

  TrainResult res;
  for (std::size_t i : split.train) res.train_ids.push_back(samples[i].id);
  for (std::size_t i : split.val) res.val_ids.push_back(samples[i].id);

  ParameterSet weights = hmcnn::init_weights(cfg.model, cfg.seed);
  weights.set_requires_grad(true);
  std::vector<Tensor> params = weights.tensors();
  Adam adam(AdamHyper{cfg.lr0, 0.9, 0.999, 1e-8});

  fs::create_directories(cfg.output_dir);
  res.weights_path = cfg.output_dir / "weights.hmw";
  res.manifest_path = cfg.output_dir / "manifest.json";
  std::vector<std::string> checkpoints;

  const auto t_eval0 = Clock::now();
  res.initial_train_loss = mean_loss(samples, split.train, weights, cfg, phi);
  double eval_s = seconds_since(t_eval0);

  const auto t_train = Clock::now();
  std::vector<double> epoch_lr;
  std::string abort_reason;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs && !res.aborted; ++epoch) {
    if (cfg.max_steps && res.steps >= cfg.max_steps) break;
    const double lr = learning_rate(cfg, epoch);
    adam.set_lr(lr);
    epoch_lr.push_back(lr);
    const auto order = epoch_order(split.train, cfg.seed, epoch);
    double epoch_acc = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      if (cfg.max_steps && res.steps >= cfg.max_steps) break;
      const std::size_t count = std::min(cfg.batch_size, order.size() - pos);
      const Batch batch = make_batch(samples, std::span(order).subspan(pos, count));
      double loss_value = 0.0;
      try {
        Tape tape;
        const auto r = hmcnn::forward(tape, batch.lrms, batch.pan, weights, cfg.model);
        const auto terms = losses::total_loss(tape, r.fused_x2, r.fused_x4, batch.hrms, phi, cfg.loss);
        loss_value = terms.total.item();
        tape.backward(terms.total);
      } catch (const NumericError& e) {
        abort_reason = e.what();
      }
      if (abort_reason.empty() && (!std::isfinite(loss_value) || !all_finite(weights))) {
        abort_reason = "non-finite loss or gradient at step " + std::to_string(res.steps);
      }
      if (!abort_reason.empty()) {
        res.aborted = true;
        break;
      }
      adam.step(params);
      weights.zero_grad();
      res.step_losses.push_back(loss_value);
      epoch_acc += loss_value;
      ++epoch_steps;
      ++res.steps;
    }
    if (epoch_steps) res.epoch_losses.push_back(epoch_acc / static_cast<double>(epoch_steps));
    res.epochs = epoch + 1;
    if (!res.aborted && cfg.checkpoint_every && (epoch + 1) % cfg.checkpoint_every == 0) {
      const std::string name = "checkpoint_epoch" + std::to_string(epoch + 1) + ".hmw";
      save_weights(weights, cfg.output_dir / name);
      checkpoints.push_back(name);
    }
  }
  const double train_s = seconds_since(t_train);

  // Parameters only change after a step passed the finiteness checks, so the
  // current values are the last good ones even after an abort.
  res.weights = weights.clone();
  save_weights(res.weights, res.weights_path);

  if (!res.aborted) {
    const auto t_eval1 = Clock::now();
    res.final_train_loss = mean_loss(samples, split.train, res.weights, cfg, phi);
    if (!split.val.empty()) res.final_val_loss = mean_loss(samples, split.val, res.weights, cfg, phi);
    eval_s += seconds_since(t_eval1);
  }

  const ConfigFile snapshot = cfg.to_file();
  json cfg_json = json::object();
  for (const auto& [k, v] : snapshot.entries()) cfg_json[k] = v;
  json m;
  m["software"] = {{"name", "pansharp"}, {"version", version()}};
  m["seed"] = cfg.seed;
  m["config"] = cfg_json;
  m["dataset"] = {{"index", cfg.data_index.string()},
                  {"entries", samples.size()},
                  {"train_ids", res.train_ids},
                  {"val_ids", res.val_ids}};
  m["steps"] = res.steps;
  m["epochs"] = res.epochs;
  m["aborted"] = res.aborted;
  if (res.aborted) m["abort_reason"] = abort_reason;
  m["epoch_learning_rates"] = to_json(epoch_lr);
  m["step_losses"] = to_json(res.step_losses);
  m["epoch_losses"] = to_json(res.epoch_losses);
  m["initial_train_loss"] = res.initial_train_loss;
  m["final_train_loss"] = res.aborted ? json(nullptr) : json(res.final_train_loss);
  m["final_val_loss"] = optional_json(res.final_val_loss);
  m["artifacts"] = {{"weights", res.weights_path.filename().string()},
                    {"checkpoints", checkpoints},
                    {"config", "config.txt"}};
  m["timing_seconds"] = {{"load", load_s}, {"train", train_s}, {"evaluate", eval_s}};
  write_text(cfg.output_dir / "config.txt", snapshot.str());
  write_text(res.manifest_path, m.dump(2) + "\n");

  if (res.aborted) {
    throw NumericError("training aborted: " + abort_reason + "; last good weights kept in " +
                       res.weights_path.string());
  }
  return res;
}

TrainConfig load_train_config(const fs::path& config_path, std::optional<std::uint64_t> seed) {
  ConfigFile file = ConfigFile::load(config_path);
  if (seed) file.set("train.seed", std::to_string(*seed));
  TrainConfig cfg = TrainConfig::from(file);
  const fs::path base = config_path.parent_path();
  if (!cfg.data_index.empty() && cfg.data_index.is_relative()) cfg.data_index = base / cfg.data_index;
  if (cfg.output_dir.is_relative()) cfg.output_dir = base / cfg.output_dir;
  if (!cfg.phi_weights_path.empty() && cfg.phi_weights_path.is_relative()) {
    cfg.phi_weights_path = base / cfg.phi_weights_path;
  }
  return cfg;
}

TrainResult cmd_train(const fs::path& config_path) { return cmd_train(load_train_config(config_path)); }

// --- fusion ---------------------------------------------------------------

hmcnn::HmcnnConfig infer_model_config(const ParameterSet& weights, bool progressive_chain) {
  hmcnn::HmcnnConfig c;
  c.progressive_chain = progressive_chain;
  c.share_hmb_across_bands = weights.contains("stage1.hmb.entry.weight");
  const std::string prefix = c.share_hmb_across_bands ? "stage1.hmb" : "stage1.hmb.R";
  c.feat_channels = weights.entry("f1.head.weight").dims.at(0);
  c.attention_hidden = weights.entry(prefix + ".sa.conv1.weight").dims.at(0);
  std::size_t n = 0;
  while (weights.contains(prefix + ".res" + std::to_string(n) + ".conv1.weight")) ++n;
  c.n_res_blocks = n;
  try {
    hmcnn::check_weights(weights, c);
  } catch (const ConfigError& e) {
    throw WeightFileError(std::string("weights do not describe a valid model: ") + e.what());
  }
  return c;
}

const std::vector<std::string>& fusion_methods() {
  static const std::vector<std::string> names{"ihs", "brovey", "gs", "sfim", "hmcnn"};
  return names;
}

FuseResult fuse(const Raster& lrms, const Raster& pan, int s, const FuseOptions& options) {
  const auto& names = fusion_methods();
  if (std::find(names.begin(), names.end(), options.method) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("unknown fusion method '" + options.method + "' (valid: " + list + ")");
  }
  FuseResult out;
  const auto t0 = Clock::now();
  if (options.method == "hmcnn") {
    if (!options.weights) throw UsageError("method hmcnn requires --weights");
    const ParameterSet w = load_weights(*options.weights);
    hmcnn::HmcnnConfig cfg = options.model ? *options.model : infer_model_config(w);
    if (cfg.s != s) throw UsageError("hmcnn runs at s = 4 only");
    out.fused = hmcnn::predict(lrms, pan, w, cfg, hmcnn::PredictOptions{options.tile, options.overlap});
  } else {
    const classical::FusionInput in{lrms, pan, ScaleFactor(s)};
    auto r = classical::fuse(classical::method_from_string(options.method), in);
    out.fused = std::move(r.fused);
    out.passthrough_pixels = r.passthrough_pixels;
  }
  out.seconds = seconds_since(t0);
  return out;
}

FuseResult cmd_fuse(const fs::path& lrms_path, const fs::path& pan_path, int s,
                    const fs::path& out_path, const FuseOptions& options) {
  const Raster lrms = load(lrms_path);
  const Raster pan = load(pan_path);
  FuseResult r = fuse(lrms, pan, s, options);
  write_raster(r.fused, out_path);
  json j;
  j["software"] = {{"name", "pansharp"}, {"version", version()}};
  j["method"] = options.method;
  j["inputs"] = {{"lrms", lrms_path.string()}, {"pan", pan_path.string()}};
  if (options.weights) j["weights"] = options.weights->string();
  j["s"] = s;
  j["output"] = {{"path", out_path.string()}, {"width", r.fused.width()},
                 {"height", r.fused.height()}, {"bands", r.fused.bands()}};
  j["passthrough_pixels"] = r.passthrough_pixels;
  j["wall_clock_seconds"] = r.seconds;
  write_text(sidecar(out_path), j.dump(2) + "\n");
  return r;
}

// --- evaluation -----------------------------------------------------------

std::string report_json(const metrics::MetricReport& r, int s) {
  json j;
  j["software"] = {{"name", "pansharp"}, {"version", version()}};
  j["protocol"] = metrics::to_string(r.protocol);
  j["s"] = s;
  j["ergas"] = optional_json(r.ergas);
  j["rmse"] = optional_json(r.rmse);
  j["rmae"] = optional_json(r.rmae);
  j["sam_degrees"] = optional_json(r.sam_degrees);
  j["uiqi"] = optional_json(r.uiqi);
  j["d_lambda"] = r.d_lambda;
  j["d_s"] = r.d_s;
  j["qnr"] = r.qnr;
  j["per_band"] = {{"rmse", r.rmse_per_band}, {"rmae", r.rmae_per_band}, {"uiqi", r.uiqi_per_band}};
  j["skipped"] = {{"sam_pixels", r.sam_skipped_pixels}, {"uiqi_windows", r.uiqi_skipped_windows}};
  j["definitions"] = {{"rmae", metrics::kRmaeDefinition},
                      {"uiqi_window", 8},
                      {"uiqi_stride", 1},
                      {"qnr_exponents", {1, 1}},
                      {"distortion_exponents", {1, 1}}};
  return j.dump(2) + "\n";
}

std::string csv_row(const std::string& method, const metrics::MetricReport& r) {
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
  };
  std::ostringstream os;
  os << method << ',' << cell(r.ergas) << ',' << cell(r.rmse) << ',' << cell(r.rmae) << ','
     << cell(r.sam_degrees) << ',' << cell(r.uiqi) << ',' << cell(r.d_lambda) << ','
     << cell(r.d_s) << ',' << cell(r.qnr);
  return os.str();
}

metrics::MetricReport cmd_evaluate(const fs::path& fused_path, const fs::path& lrms_path,
                                   const fs::path& pan_path, int s, const fs::path& out_report,
                                   const EvaluateOptions& options) {
  const Raster fused = load(fused_path);
  const Raster lrms = load(lrms_path);
  const Raster pan = load(pan_path);
  std::optional<Raster> ref;
  if (options.ref) ref = load(*options.ref);
  const metrics::EvaluationInput in{fused, ref ? &*ref : nullptr, lrms, pan, ScaleFactor(s)};
  const metrics::MetricReport rep = metrics::evaluate_all(in);
  write_text(out_report, report_json(rep, s));
  if (options.csv) {
    const bool fresh = !fs::exists(*options.csv) || fs::file_size(*options.csv) == 0;
    if (!options.csv->parent_path().empty()) fs::create_directories(options.csv->parent_path());
    std::ofstream os(*options.csv, std::ios::app | std::ios::binary);
    if (!os) throw IoError("cannot append to " + options.csv->string());
    if (fresh) os << kCsvHeader << '\n';
    os << csv_row(options.method, rep) << '\n';
    if (!os) throw IoError("write failed: " + options.csv->string());
  }
  return rep;
}

ErrorMap error_map(const Raster& fused, const Raster& ref) {
  if (!fused.same_geometry(ref)) {
    throw ShapeError("error map: " + fused.describe() + " vs " + ref.describe());
  }
  ErrorMap e;
  e.map = Raster(ref.width(), ref.height(), {BandRole::Unknown}, ref.range());
  auto out = e.map.band(0);
  for (std::size_t b = 0; b < ref.bands(); ++b) {
    auto f = fused.band(b);
    auto r = ref.band(b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (f[i] - r[i]) * (f[i] - r[i]);
  }
  double acc = 0.0;
  for (double& v : out) {
    v /= static_cast<double>(ref.bands());
    e.max_value = std::max(e.max_value, v);
    acc += v;
  }
  e.mean_value = acc / static_cast<double>(out.size());
  return e;
}

ErrorMap cmd_error_map(const fs::path& fused_path, const fs::path& ref_path, const fs::path& out) {
  ErrorMap e = error_map(load(fused_path), load(ref_path));
  GrayImage img{e.map.width(), e.map.height(), 255, {}};
  img.pixels.reserve(e.map.plane_size());
  const ValueRange scale{0.0, e.max_value > 0.0 ? e.max_value : 1.0};
  for (double v : e.map.band(0)) img.pixels.push_back(quantize(v, scale, 255));
  write_file_bytes(out, encode_pgm(img));
  json j;
  j["software"] = {{"name", "pansharp"}, {"version", version()}};
  j["quantity"] = "per-pixel squared error averaged over bands";
  j["fused"] = fused_path.string();
  j["ref"] = ref_path.string();
  j["maxval"] = 255;
  j["scale_max_squared_error"] = scale.max;
  j["value_per_gray_level"] = scale.max / 255.0;
  j["max_squared_error"] = e.max_value;
  j["mean_squared_error"] = e.mean_value;
  write_text(sidecar(out), j.dump(2) + "\n");
  return e;
}

// --- classification -------------------------------------------------------

isodata::LabelMap label_map_from_pgm(const GrayImage& image) {
  isodata::LabelMap m;
  m.width = image.width;
  m.height = image.height;
  std::uint32_t max_label = 0;
  for (std::uint16_t p : image.pixels) {
    m.labels.push_back(p);
    max_label = std::max<std::uint32_t>(max_label, p);
  }
  m.k_final = m.labels.empty() ? 0 : max_label + 1;
  return m;
}

ClassifyResult cmd_classify(const fs::path& image_path, const isodata::IsodataParams& params,
                            const fs::path& out, const std::optional<fs::path>& compare) {
  const Raster img = load(image_path);
  ClassifyResult res;
  res.labels = isodata::classify(img, params);
  const auto& lm = res.labels;
  GrayImage g{lm.width, lm.height,
              static_cast<std::uint16_t>(std::max<std::size_t>(lm.k_final, 2) - 1), {}};
  g.pixels.assign(lm.labels.begin(), lm.labels.end());
  write_file_bytes(out, encode_pgm(g));
  if (compare) {
    const auto other = label_map_from_pgm(decode_pgm(read_file_bytes(*compare)));
    res.agreement = isodata::agreement(lm, other);
  }
  json j;
  j["software"] = {{"name", "pansharp"}, {"version", version()}};
  j["image"] = image_path.string();
  j["k_final"] = lm.k_final;
  j["centers"] = lm.centers;
  j["params"] = {{"k_init", params.k_init},
                 {"max_iter", params.max_iter},
                 {"min_cluster_size", params.min_cluster_size},
                 {"split_std_threshold", params.split_std_threshold},
                 {"merge_dist_threshold", params.merge_dist_threshold},
                 {"seed", params.seed}};
  if (compare) {
    j["compare"] = compare->string();
    j["agreement"] = *res.agreement;
  }
  write_text(sidecar(out), j.dump(2) + "\n");
  return res;
}

// --- timing ---------------------------------------------------------------

std::vector<BenchRow> cmd_bench(const std::vector<std::string>& methods, const Raster& lrms,
                                const Raster& pan, int s, std::size_t repetitions,
                                const FuseOptions& base) {
  if (repetitions < 1) throw UsageError("bench: repetitions must be >= 1");
  std::vector<BenchRow> rows;
  for (const auto& m : methods) {
    FuseOptions o = base;
    o.method = m;
    BenchRow row{m, repetitions, 0.0, 0.0};
    double total = 0.0;
    double best = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
      const auto t0 = Clock::now();
      (void)fuse(lrms, pan, s, o);
      const double ms = 1e3 * seconds_since(t0);
      total += ms;
      best = r == 0 ? ms : std::min(best, ms);
    }
    row.mean_ms = total / static_cast<double>(repetitions);
    row.min_ms = best;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << kBenchDisclaimer << '\n' << "method,repetitions,mean_ms,min_ms\n";
  os.setf(std::ios::fixed);
  os.precision(3);
  for (const auto& r : rows) {
    os << r.method << ',' << r.repetitions << ',' << r.mean_ms << ',' << r.min_ms << '\n';
  }
  return os.str();
}

}  // namespace pansharp::harness

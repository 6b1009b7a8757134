#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pansharp/config.hpp"
#include "pansharp/isodata.hpp"
#include "pansharp/metrics.hpp"
#include "pansharp/parameters.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/raster_io.hpp"

namespace pansharp::harness {

namespace fs = std::filesystem;

/// Software version recorded in manifests and sidecars.
const char* version();

// --- dataset index ------------------------------------------------------

/// index.tsv: header `id<TAB>hrms<TAB>pan<TAB>lrms`, one triple per line,
/// paths relative to the index file's directory.
inline constexpr const char* kIndexFile = "index.tsv";

struct IndexEntry {
  std::string id;
  fs::path hrms;
  fs::path pan;
  fs::path lrms;
};

void write_index(const fs::path& path, const std::vector<IndexEntry>& entries);
/// Paths in the result are resolved against the index directory.
std::vector<IndexEntry> read_index(const fs::path& path);

struct DegradeOptions {
  int s = 4;
  std::size_t patch = 256;
  std::size_t stride = 256;
  std::string source_id = "scene";
};

/// Crops and Wald-degrades one HRMS/PAN pair into MBR1 triples under
/// out_dir and writes out_dir/index.tsv.
std::vector<IndexEntry> cmd_degrade(const fs::path& hrms_path, const fs::path& pan_path,
                                    const fs::path& out_dir, const DegradeOptions& options);

struct SynthOptions {
  std::size_t scenes = 8;
  std::size_t size = 128;  // scene edge in PAN pixels
  std::size_t patch = 64;
  int s = 4;
  std::uint64_t seed = 1;
};

/// Synthesizes textured scenes, writes them as MBR1 and degrades them all
/// into one patch set indexed by out_dir/index.tsv.
std::vector<IndexEntry> cmd_synth(const fs::path& out_dir, const SynthOptions& options);

// --- training -------------------------------------------------------------

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Seed-stable split: entries ordered by a hash of (seed, index); the first
/// round(n * val_fraction) go to validation (at least one when n >= 2 and
/// the fraction is positive). Both lists are in index order.
Split split_indices(std::size_t n, double val_fraction, std::uint64_t seed);

/// Epoch visiting order of the training entries (Fisher-Yates, seeded by
/// seed and epoch).
std::vector<std::size_t> epoch_order(const std::vector<std::size_t>& train, std::uint64_t seed,
                                     std::size_t epoch);

struct TrainResult {
  std::vector<double> step_losses;
  std::vector<double> epoch_losses;  // mean step loss per epoch
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  std::optional<double> final_val_loss;
  std::size_t steps = 0;
  std::size_t epochs = 0;
  bool aborted = false;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  fs::path weights_path;
  fs::path manifest_path;
  ParameterSet weights;
};

/// Trains on the indexed dataset and writes weights.hmw and manifest.json
/// into config.output_dir. A non-finite loss or gradient stops training,
/// writes the last good weights and throws NumericError.
TrainResult cmd_train(const TrainConfig& config);
TrainResult cmd_train(const fs::path& config_path);

/// Loads a config file; relative data, output and phi paths are resolved
/// against the file's directory. `seed` overrides train.seed.
TrainConfig load_train_config(const fs::path& config_path,
                              std::optional<std::uint64_t> seed = std::nullopt);

// --- fusion ---------------------------------------------------------------

/// Model shape recovered from parameter names and dimensions.
hmcnn::HmcnnConfig infer_model_config(const ParameterSet& weights, bool progressive_chain = true);

struct FuseOptions {
  std::string method;
  std::optional<fs::path> weights;
  /// Model settings for hmcnn; inferred from the weights when absent.
  std::optional<hmcnn::HmcnnConfig> model;
  std::size_t tile = 256;
  std::size_t overlap = 16;
};

struct FuseResult {
  Raster fused;
  double seconds = 0.0;
  std::size_t passthrough_pixels = 0;
};

/// Valid names for the fuse --method flag.
const std::vector<std::string>& fusion_methods();

/// Fuses in memory. Unknown method or hmcnn without weights is a UsageError.
FuseResult fuse(const Raster& lrms, const Raster& pan, int s, const FuseOptions& options);

/// Reads inputs, fuses, writes the MBR1 result and a JSON sidecar
/// (<out>.json) with the method and wall-clock.
FuseResult cmd_fuse(const fs::path& lrms_path, const fs::path& pan_path, int s,
                    const fs::path& out_path, const FuseOptions& options);

// --- evaluation -----------------------------------------------------------

/// Column order of the CSV rows appended by cmd_evaluate.
inline constexpr const char* kCsvHeader = "method,ergas,rmse,rmae,sam,uiqi,d_lambda,d_s,qnr";

std::string report_json(const metrics::MetricReport& report, int s);
std::string csv_row(const std::string& method, const metrics::MetricReport& report);

struct EvaluateOptions {
  std::optional<fs::path> ref;
  std::optional<fs::path> csv;
  std::string method = "unnamed";
};

metrics::MetricReport cmd_evaluate(const fs::path& fused_path, const fs::path& lrms_path,
                                   const fs::path& pan_path, int s, const fs::path& out_report,
                                   const EvaluateOptions& options);

struct ErrorMap {
  Raster map;  // one band: per-pixel squared error averaged over bands
  double max_value = 0.0;
  double mean_value = 0.0;
};

ErrorMap error_map(const Raster& fused, const Raster& ref);
/// Writes the map as 8-bit PGM scaled linearly from 0 to its maximum, plus
/// <out>.json recording the scale.
ErrorMap cmd_error_map(const fs::path& fused_path, const fs::path& ref_path, const fs::path& out);

// --- classification -------------------------------------------------------

struct ClassifyResult {
  isodata::LabelMap labels;
  std::optional<double> agreement;
};

/// Label map PGM with gray level = class id (maxval k_final - 1) plus a JSON
/// sidecar with centers and k_final. `compare` is a label PGM written by an
/// earlier run.
ClassifyResult cmd_classify(const fs::path& image_path, const isodata::IsodataParams& params,
                            const fs::path& out, const std::optional<fs::path>& compare);

isodata::LabelMap label_map_from_pgm(const GrayImage& image);

// --- timing ---------------------------------------------------------------

struct BenchRow {
  std::string method;
  std::size_t repetitions = 0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
};

/// Header comment placed above bench CSV output.
inline constexpr const char* kBenchDisclaimer =
    "# wall-clock on this machine and build only; not comparable to timings "
    "published for other hardware or implementations";

std::vector<BenchRow> cmd_bench(const std::vector<std::string>& methods, const Raster& lrms,
                                const Raster& pan, int s, std::size_t repetitions,
                                const FuseOptions& base);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace pansharp::harness

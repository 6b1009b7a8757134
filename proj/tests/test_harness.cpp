#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "pansharp/config.hpp"
#include "pansharp/errors.hpp"
#include "pansharp/harness.hpp"
#include "pansharp/hmcnn.hpp"
#include "pansharp/losses.hpp"
#include "pansharp/raster_io.hpp"

using namespace pansharp;
namespace hn = pansharp::harness;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return files;
}

void write_pair(const fs::path& dir, std::size_t size, std::uint64_t seed) {
  write_raster(oracle::random_raster(size, size, rgbn_roles(), seed, 1.0, 2047.0), dir / "h.mbr");
  write_raster(oracle::random_raster(size, size, {BandRole::Pan}, seed + 1, 1.0, 2047.0),
               dir / "p.mbr");
}

}  // namespace

TEST(Schedule, StepDecay) {
  const TrainConfig cfg;
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 0), 1e-4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 999), 1e-4);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 1000), 1e-5);
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 1999), 1e-5);
  EXPECT_EQ(cfg.batch_size, 12u);
  EXPECT_EQ(cfg.max_epochs, 2000u);
  EXPECT_DOUBLE_EQ(cfg.loss.alpha, 1e-3);
}

TEST(Config, ParseRoundTripAndErrors) {
  const auto f = ConfigFile::parse(
      "# comment\n\ntrain.batch_size = 4\ntrain.seed=0x10\n  train.lr0 = 2.5e-4 \n"
      "model.share_hmb = false\n");
  EXPECT_EQ(f.get_uint("train.batch_size", 0), 4u);
  EXPECT_EQ(f.get_uint("train.seed", 0), 16u);
  EXPECT_DOUBLE_EQ(f.get_double("train.lr0", 0), 2.5e-4);
  EXPECT_FALSE(f.get_bool("model.share_hmb", true));
  const TrainConfig cfg = TrainConfig::from(f);
  EXPECT_EQ(cfg.batch_size, 4u);
  EXPECT_FALSE(cfg.model.share_hmb_across_bands);
  const TrainConfig back = TrainConfig::from(ConfigFile::parse(cfg.to_file().str()));
  EXPECT_EQ(back.to_file().str(), cfg.to_file().str());

  EXPECT_THROW(ConfigFile::parse("nodot = 1\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("a.b.c = 1\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("train.seed\n"), ConfigError);
  EXPECT_THROW(TrainConfig::from(ConfigFile::parse("train.bogus = 1\n")), ConfigError);
  EXPECT_THROW(TrainConfig::from(ConfigFile::parse("train.batch_size = 0\n")), ConfigError);
  EXPECT_THROW(TrainConfig::from(ConfigFile::parse("train.lr0 = nan\n")), ConfigError);
}

TEST(Degrade, FourTriplesIndexedOnceAndByteIdentical) {
  const auto dir = oracle::scratch_dir("degrade");
  write_pair(dir, 512, 1);
  hn::DegradeOptions opt;
  opt.source_id = "img";
  const auto a = hn::cmd_degrade(dir / "h.mbr", dir / "p.mbr", dir / "out1", opt);
  ASSERT_EQ(a.size(), 4u);
  const auto idx = hn::read_index(dir / "out1" / hn::kIndexFile);
  ASSERT_EQ(idx.size(), 4u);
  std::set<std::string> ids;
  for (const auto& e : idx) {
    EXPECT_TRUE(ids.insert(e.id).second);
    const Raster l = read_raster(e.lrms);
    EXPECT_EQ(l.width(), 64u);
    EXPECT_EQ(read_raster(e.hrms).width(), 256u);
    EXPECT_EQ(read_raster(e.pan).bands(), 1u);
  }
  // exactly the triples on disk, nothing else besides the index
  EXPECT_EQ(snapshot(dir / "out1").size(), 4u * 3u + 1u);
  hn::cmd_degrade(dir / "h.mbr", dir / "p.mbr", dir / "out2", opt);
  EXPECT_EQ(snapshot(dir / "out1"), snapshot(dir / "out2"));
}

TEST(Index, BadHeaderRejected) {
  const auto dir = oracle::scratch_dir("index");
  std::ofstream(dir / "index.tsv") << "a\tb\n";
  EXPECT_THROW(hn::read_index(dir / "index.tsv"), FormatError);
}

TEST(Split, SeedStableDisjointCovering) {
  const auto s = hn::split_indices(32, 0.1, 7);
  EXPECT_EQ(s.val.size(), 3u);
  EXPECT_EQ(s.train.size(), 29u);
  std::set<std::size_t> all(s.val.begin(), s.val.end());
  all.insert(s.train.begin(), s.train.end());
  EXPECT_EQ(all.size(), 32u);
  const auto t = hn::split_indices(32, 0.1, 7);
  EXPECT_EQ(s.val, t.val);
  EXPECT_NE(hn::split_indices(32, 0.1, 8).val, s.val);
  const auto o1 = hn::epoch_order(s.train, 7, 0), o2 = hn::epoch_order(s.train, 7, 0);
  EXPECT_EQ(o1, o2);
  EXPECT_NE(o1, hn::epoch_order(s.train, 7, 1));
}

TEST(Fuse, MethodsAndErrors) {
  const Raster lrms = oracle::random_raster(8, 8, rgbn_roles(), 10, 10.0, 2047.0);
  const Raster pan = oracle::random_raster(32, 32, {BandRole::Pan}, 11, 10.0, 2047.0);
  hn::FuseOptions opt;
  opt.method = "sfim";
  const auto r = hn::fuse(lrms, pan, 4, opt);
  EXPECT_EQ(r.fused.width(), 32u);
  EXPECT_EQ(r.fused.bands(), 4u);
  opt.method = "wavelet";
  try {
    hn::fuse(lrms, pan, 4, opt);
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    for (const auto& name : hn::fusion_methods())
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << name;
  }
  opt.method = "hmcnn";
  EXPECT_THROW(hn::fuse(lrms, pan, 4, opt), UsageError);
}

TEST(Fuse, HmcnnFromWeightsFile) {
  const auto dir = oracle::scratch_dir("fuse_hmcnn");
  hmcnn::HmcnnConfig cfg;
  cfg.n_res_blocks = 1;
  cfg.feat_channels = 4;
  cfg.attention_hidden = 2;
  save_weights(hmcnn::init_weights(cfg, 3), dir / "w.hmw");
  const auto inferred = hn::infer_model_config(load_weights(dir / "w.hmw"));
  EXPECT_EQ(inferred.n_res_blocks, 1u);
  EXPECT_EQ(inferred.feat_channels, 4u);
  EXPECT_EQ(inferred.attention_hidden, 2u);
  write_raster(oracle::random_raster(8, 8, rgbn_roles(), 12), dir / "l.mbr");
  write_raster(oracle::random_raster(32, 32, {BandRole::Pan}, 13), dir / "p.mbr");
  hn::FuseOptions opt;
  opt.method = "hmcnn";
  opt.weights = dir / "w.hmw";
  const auto r = hn::cmd_fuse(dir / "l.mbr", dir / "p.mbr", 4, dir / "f.mbr", opt);
  EXPECT_EQ(read_raster(dir / "f.mbr"), r.fused);
  const json side = json::parse(slurp(dir / "f.mbr.json"));
  EXPECT_EQ(side["method"], "hmcnn");
  EXPECT_EQ(side["output"]["width"], 32);
}

TEST(Evaluate, PerfectFusionJsonAndCsv) {
  const auto dir = oracle::scratch_dir("evaluate");
  const Raster ref = oracle::random_raster(16, 16, rgbn_roles(), 20, 1.0, 2047.0);
  Raster pan(16, 16, {BandRole::Pan});
  std::copy(ref.band(0).begin(), ref.band(0).end(), pan.data().begin());
  write_raster(ref, dir / "ref.mbr");
  write_raster(pan, dir / "pan.mbr");
  hn::EvaluateOptions eo;
  eo.ref = dir / "ref.mbr";
  eo.csv = dir / "table.csv";
  eo.method = "perfect";
  hn::cmd_evaluate(dir / "ref.mbr", dir / "ref.mbr", dir / "pan.mbr", 1, dir / "r.json", eo);
  const json j = json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(j["protocol"], "reduced");
  for (const char* k : {"ergas", "rmse", "rmae", "sam_degrees", "d_lambda", "d_s"})
    EXPECT_EQ(j[k].get<double>(), 0.0) << k;
  EXPECT_EQ(j["uiqi"].get<double>(), 1.0);
  EXPECT_EQ(j["qnr"].get<double>(), 1.0);

  eo.method = "again";
  hn::cmd_evaluate(dir / "ref.mbr", dir / "ref.mbr", dir / "pan.mbr", 1, dir / "r2.json", eo);
  std::istringstream csv(slurp(dir / "table.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], hn::kCsvHeader);
  EXPECT_EQ(lines[0], "method,ergas,rmse,rmae,sam,uiqi,d_lambda,d_s,qnr");
  EXPECT_EQ(lines[1].substr(0, 8), "perfect,");
  EXPECT_EQ(std::count(lines[2].begin(), lines[2].end(), ','), 8);
}

TEST(Evaluate, MissingRefGivesFullProtocol) {
  const auto dir = oracle::scratch_dir("evaluate_full");
  write_raster(oracle::random_raster(16, 16, rgbn_roles(), 21, 1.0, 2047.0), dir / "f.mbr");
  write_raster(oracle::random_raster(4, 4, rgbn_roles(), 22, 1.0, 2047.0), dir / "l.mbr");
  write_raster(oracle::random_raster(16, 16, {BandRole::Pan}, 23, 1.0, 2047.0), dir / "p.mbr");
  const auto rep = hn::cmd_evaluate(dir / "f.mbr", dir / "l.mbr", dir / "p.mbr", 4,
                                    dir / "r.json", {});
  EXPECT_EQ(rep.protocol, metrics::Protocol::Full);
  const json j = json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(j["protocol"], "full");
  int present = 0;
  for (const char* k : {"ergas", "rmse", "rmae", "sam_degrees", "uiqi", "d_lambda", "d_s", "qnr"})
    present += j[k].is_number() ? 1 : 0;
  EXPECT_EQ(present, 3);
  const std::string row = hn::csv_row("x", rep);
  EXPECT_EQ(row.substr(0, 7), "x,,,,,,");
}

TEST(ErrorMap, CasesAndPixelLossConsistency) {
  const Raster ref = oracle::random_raster(12, 10, rgbn_roles(), 30);
  const auto zero = hn::error_map(ref, ref);
  for (double v : zero.map.data()) ASSERT_EQ(v, 0.0);
  Raster one = ref;
  one.at(2, 3, 4) += 5.0;
  const auto single = hn::error_map(one, ref);
  std::size_t nonzero = 0;
  for (double v : single.map.data()) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, 1u);
  EXPECT_DOUBLE_EQ(single.map.at(0, 3, 4), 25.0 / 4.0);

  const Raster fused = oracle::random_raster(12, 10, rgbn_roles(), 31);
  const auto e = hn::error_map(fused, ref);
  Tape tape(false);
  const double mse =
      losses::pixel_loss(tape, hmcnn::to_tensor(fused), hmcnn::to_tensor(ref)).item();
  const double raw_mse = [&] {
    long double s = 0.0L;
    for (std::size_t i = 0; i < ref.data().size(); ++i) {
      const long double d = fused.data()[i] - ref.data()[i];
      s += d * d;
    }
    return static_cast<double>(s / ref.data().size());
  }();
  EXPECT_NEAR(e.mean_value, raw_mse, 1e-12 * raw_mse);
  // to_tensor normalizes by the value range
  EXPECT_NEAR(e.mean_value / (2047.0 * 2047.0), mse, 1e-12 * mse);

  const auto dir = oracle::scratch_dir("error_map");
  write_raster(fused, dir / "f.mbr");
  write_raster(ref, dir / "r.mbr");
  hn::cmd_error_map(dir / "f.mbr", dir / "r.mbr", dir / "e.pgm");
  const auto pgm = decode_pgm(read_file_bytes(dir / "e.pgm"));
  EXPECT_EQ(pgm.width, 12u);
  EXPECT_EQ(*std::max_element(pgm.pixels.begin(), pgm.pixels.end()), 255);
  const json side = json::parse(slurp(dir / "e.pgm.json"));
  EXPECT_DOUBLE_EQ(side["scale_max_squared_error"].get<double>(), e.max_value);
}

TEST(Classify, PgmSidecarAndCompare) {
  const auto dir = oracle::scratch_dir("classify");
  Raster img(16, 16, rgbn_roles());
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) img.at(b, y, x) = x < 8 ? 200.0 : 1800.0;
  write_raster(img, dir / "img.mbr");
  isodata::IsodataParams p;
  p.k_init = 2;
  const auto a = hn::cmd_classify(dir / "img.mbr", p, dir / "a.pgm", std::nullopt);
  EXPECT_EQ(a.labels.k_final, 2u);
  const auto back = hn::label_map_from_pgm(decode_pgm(read_file_bytes(dir / "a.pgm")));
  EXPECT_EQ(back.labels, a.labels.labels);
  const json side = json::parse(slurp(dir / "a.pgm.json"));
  EXPECT_EQ(side["k_final"], 2);
  const auto b = hn::cmd_classify(dir / "img.mbr", p, dir / "b.pgm", dir / "a.pgm");
  ASSERT_TRUE(b.agreement.has_value());
  EXPECT_EQ(*b.agreement, 1.0);
}

TEST(Bench, CsvCarriesDisclaimer) {
  const Raster lrms = oracle::random_raster(8, 8, rgbn_roles(), 40, 10.0, 2047.0);
  const Raster pan = oracle::random_raster(32, 32, {BandRole::Pan}, 41, 10.0, 2047.0);
  const auto rows = hn::cmd_bench({"ihs", "sfim"}, lrms, pan, 4, 2, {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(rows[0].min_ms, rows[0].mean_ms);
  const std::string csv = hn::bench_csv(rows);
  EXPECT_EQ(csv.rfind(hn::kBenchDisclaimer, 0), 0u);
  EXPECT_NE(csv.find("ihs,"), std::string::npos);
}

TEST(Train, TinyRunWritesArtifacts) {
  const auto dir = oracle::scratch_dir("train_tiny");
  hn::SynthOptions so;
  so.scenes = 2;
  so.size = 64;
  so.patch = 32;
  so.seed = 5;
  const auto entries = hn::cmd_synth(dir / "data", so);
  EXPECT_EQ(entries.size(), 8u);
  std::ofstream(dir / "train.cfg") << "data.index = data/index.tsv\n"
                                      "output.dir = run\n"
                                      "train.batch_size = 2\n"
                                      "train.max_epochs = 2\n"
                                      "train.checkpoint_every = 1\n"
                                      "train.lr0 = 1e-3\n"
                                      "model.n_res_blocks = 1\n"
                                      "model.feat_channels = 4\n"
                                      "model.attention_hidden = 2\n";
  const auto r = hn::cmd_train(dir / "train.cfg");
  EXPECT_EQ(r.epochs, 2u);
  EXPECT_EQ(r.steps, 8u);  // 7 training triples, batch 2, 2 epochs
  EXPECT_EQ(r.step_losses.size(), r.steps);
  EXPECT_EQ(r.val_ids.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "run" / "weights.hmw"));
  const json m = json::parse(slurp(dir / "run" / "manifest.json"));
  EXPECT_EQ(m["seed"], 1);
  EXPECT_EQ(m["steps"], 8);
  EXPECT_EQ(m["step_losses"].size(), 8u);
  EXPECT_EQ(m["artifacts"]["checkpoints"].size(), 2u);
  EXPECT_TRUE(m.contains("timing_seconds"));
  EXPECT_EQ(m["config"]["train.batch_size"], "2");
  // the saved config re-creates the run configuration
  const auto cfg = TrainConfig::from(ConfigFile::load(dir / "run" / "config.txt"));
  EXPECT_EQ(cfg.batch_size, 2u);
  EXPECT_EQ(cfg.model.feat_channels, 4u);
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  std::vector<std::vector<double>> losses;
  std::vector<std::string> weights;
  for (const char* name : {"train_rep_a", "train_rep_b"}) {
    const auto dir = oracle::scratch_dir(name);
    hn::SynthOptions so;
    so.scenes = 2;
    so.size = 64;
    so.patch = 32;
    hn::cmd_synth(dir / "data", so);
    std::ofstream(dir / "train.cfg") << "data.index = data/index.tsv\n"
                                        "output.dir = run\n"
                                        "train.batch_size = 2\n"
                                        "train.max_steps = 6\n"
                                        "train.lr0 = 1e-3\n"
                                        "model.n_res_blocks = 1\n"
                                        "model.feat_channels = 4\n"
                                        "model.attention_hidden = 2\n";
    const auto r = hn::cmd_train(dir / "train.cfg");
    losses.push_back(r.step_losses);
    weights.push_back(slurp(r.weights_path));
  }
  ASSERT_EQ(losses[0].size(), 6u);
  EXPECT_EQ(std::memcmp(losses[0].data(), losses[1].data(), 6 * sizeof(double)), 0);
  EXPECT_EQ(weights[0], weights[1]);
}

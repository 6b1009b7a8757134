// pansharp command-line front end.
//
// Exit codes: 0 success, 2 usage/config, 3 data or format, 4 numeric failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pansharp/config.hpp"
#include "pansharp/errors.hpp"
#include "pansharp/harness.hpp"
#include "pansharp/raster_io.hpp"

namespace fs = std::filesystem;
namespace hn = pansharp::harness;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void say(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cout << msg << "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pan-sharpening toolbench: synthesis, training, fusion, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "flat section.key = value config file");
  app.add_option("--seed", g.seed, "override the seed");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic textured patch dataset");
  std::string synth_out;
  hn::SynthOptions so;
  synth->add_option("out_dir", synth_out)->required();
  synth->add_option("--scenes", so.scenes, "number of scenes")->capture_default_str();
  synth->add_option("--size", so.size, "scene edge in PAN pixels")->capture_default_str();
  synth->add_option("--patch", so.patch, "patch edge in PAN pixels")->capture_default_str();

  // degrade
  auto* degrade = app.add_subcommand("degrade", "crop and Wald-degrade an HRMS/PAN pair");
  std::string dg_hrms, dg_pan, dg_out;
  hn::DegradeOptions dopt;
  degrade->add_option("hrms", dg_hrms)->required()->check(CLI::ExistingFile);
  degrade->add_option("pan", dg_pan)->required()->check(CLI::ExistingFile);
  degrade->add_option("out_dir", dg_out)->required();
  degrade->add_option("-s,--scale", dopt.s, "resolution ratio")->capture_default_str();
  degrade->add_option("--patch", dopt.patch)->capture_default_str();
  degrade->add_option("--stride", dopt.stride)->capture_default_str();
  degrade->add_option("--source-id", dopt.source_id)->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "train the network (needs --config)");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "fuse LRMS and PAN with one method");
  std::string fu_lrms, fu_pan, fu_out, fu_weights;
  hn::FuseOptions fopt;
  int fu_s = 4;
  fuse->add_option("--method", fopt.method, "ihs|brovey|gs|sfim|hmcnn")->required();
  fuse->add_option("lrms", fu_lrms)->required()->check(CLI::ExistingFile);
  fuse->add_option("pan", fu_pan)->required()->check(CLI::ExistingFile);
  fuse->add_option("out", fu_out)->required();
  fuse->add_option("--weights", fu_weights, "HMW1 weights (hmcnn)");
  fuse->add_option("-s,--scale", fu_s)->capture_default_str();
  fuse->add_option("--tile", fopt.tile)->capture_default_str();
  fuse->add_option("--overlap", fopt.overlap)->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "quality metrics as JSON (+ CSV row)");
  std::string ev_fused, ev_lrms, ev_pan, ev_out, ev_ref, ev_csv, ev_method = "unnamed";
  int ev_s = 4;
  evaluate->add_option("fused", ev_fused)->required()->check(CLI::ExistingFile);
  evaluate->add_option("lrms", ev_lrms)->required()->check(CLI::ExistingFile);
  evaluate->add_option("pan", ev_pan)->required()->check(CLI::ExistingFile);
  evaluate->add_option("report", ev_out)->required();
  evaluate->add_option("--ref", ev_ref, "reference HRMS (reduced-resolution protocol)");
  evaluate->add_option("--csv", ev_csv, "append a row to this CSV file");
  evaluate->add_option("--method", ev_method, "label for the CSV row");
  evaluate->add_option("-s,--scale", ev_s)->capture_default_str();

  // error-map
  auto* emap = app.add_subcommand("error-map", "per-pixel squared error map as PGM");
  std::string em_fused, em_ref, em_out;
  emap->add_option("fused", em_fused)->required()->check(CLI::ExistingFile);
  emap->add_option("ref", em_ref)->required()->check(CLI::ExistingFile);
  emap->add_option("out", em_out)->required();

  // classify
  auto* classify = app.add_subcommand("classify", "ISODATA classification of a raster");
  std::string cl_img, cl_out, cl_compare;
  pansharp::isodata::IsodataParams ip;
  std::optional<double> cl_split, cl_merge;
  classify->add_option("image", cl_img)->required()->check(CLI::ExistingFile);
  classify->add_option("out", cl_out)->required();
  classify->add_option("--k", ip.k_init)->capture_default_str();
  classify->add_option("--iterations", ip.max_iter)->capture_default_str();
  classify->add_option("--min-size", ip.min_cluster_size)->capture_default_str();
  classify->add_option("--split-std", cl_split, "default: 15% of the value range");
  classify->add_option("--merge-dist", cl_merge, "default: 5% of the value range");
  classify->add_option("--compare", cl_compare, "label PGM to compute agreement against");

  // bench
  auto* bench = app.add_subcommand("bench", "wall-clock timing table as CSV");
  std::string be_lrms, be_pan, be_out, be_weights;
  std::vector<std::string> be_methods{"ihs", "brovey", "gs", "sfim"};
  std::size_t be_reps = 3;
  int be_s = 4;
  bench->add_option("lrms", be_lrms)->required()->check(CLI::ExistingFile);
  bench->add_option("pan", be_pan)->required()->check(CLI::ExistingFile);
  bench->add_option("--methods", be_methods)->delimiter(',')->capture_default_str();
  bench->add_option("--repetitions", be_reps)->capture_default_str();
  bench->add_option("--weights", be_weights);
  bench->add_option("--out", be_out, "CSV path (default: stdout)");
  bench->add_option("-s,--scale", be_s)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (g.seed) so.seed = *g.seed;
      const auto entries = hn::cmd_synth(synth_out, so);
      say(g, "wrote " + std::to_string(entries.size()) + " triples to " + synth_out);
    } else if (degrade->parsed()) {
      const auto entries = hn::cmd_degrade(dg_hrms, dg_pan, dg_out, dopt);
      say(g, "wrote " + std::to_string(entries.size()) + " triples to " + dg_out);
    } else if (train->parsed()) {
      if (g.config.empty()) throw pansharp::UsageError("train needs --config");
      const auto cfg = hn::load_train_config(g.config, g.seed);
      const auto r = hn::cmd_train(cfg);
      say(g, "steps " + std::to_string(r.steps) + ", train loss " + fmt(r.initial_train_loss) +
                 " -> " + fmt(r.final_train_loss) + ", weights " + r.weights_path.string());
    } else if (fuse->parsed()) {
      if (!fu_weights.empty()) fopt.weights = fu_weights;
      if (!g.config.empty()) {
        fopt.model = pansharp::TrainConfig::from(pansharp::ConfigFile::load(g.config)).model;
      }
      const auto r = hn::cmd_fuse(fu_lrms, fu_pan, fu_s, fu_out, fopt);
      say(g, fopt.method + ": " + r.fused.describe() + " in " + fmt(r.seconds) + " s -> " + fu_out);
    } else if (evaluate->parsed()) {
      hn::EvaluateOptions eo;
      if (!ev_ref.empty()) eo.ref = ev_ref;
      if (!ev_csv.empty()) eo.csv = ev_csv;
      eo.method = ev_method;
      const auto rep = hn::cmd_evaluate(ev_fused, ev_lrms, ev_pan, ev_s, ev_out, eo);
      say(g, "ERGAS " + opt_fmt(rep.ergas) + "  RMSE " + opt_fmt(rep.rmse) + "  RMAE " +
                 opt_fmt(rep.rmae) + "  SAM " + opt_fmt(rep.sam_degrees) + "  UIQI " +
                 opt_fmt(rep.uiqi) + "  D_lambda " + fmt(rep.d_lambda) + "  D_S " + fmt(rep.d_s) +
                 "  QNR " + fmt(rep.qnr));
    } else if (emap->parsed()) {
      const auto e = hn::cmd_error_map(em_fused, em_ref, em_out);
      say(g, "mean squared error " + fmt(e.mean_value) + ", max " + fmt(e.max_value));
    } else if (classify->parsed()) {
      const auto range = pansharp::read_raster(cl_img).range();
      const auto scaled = pansharp::isodata::IsodataParams::for_range(range);
      ip.split_std_threshold = cl_split.value_or(scaled.split_std_threshold);
      ip.merge_dist_threshold = cl_merge.value_or(scaled.merge_dist_threshold);
      if (g.seed) ip.seed = *g.seed;
      std::optional<fs::path> cmp;
      if (!cl_compare.empty()) cmp = cl_compare;
      const auto r = hn::cmd_classify(cl_img, ip, cl_out, cmp);
      std::string msg = "k_final " + std::to_string(r.labels.k_final);
      if (r.agreement) msg += ", agreement " + fmt(*r.agreement);
      say(g, msg);
    } else if (bench->parsed()) {
      hn::FuseOptions base;
      if (!be_weights.empty()) base.weights = be_weights;
      const auto lrms = pansharp::read_raster(be_lrms);
      const auto pan = pansharp::read_raster(be_pan);
      const auto rows = hn::cmd_bench(be_methods, lrms, pan, be_s, be_reps, base);
      const std::string csv = hn::bench_csv(rows);
      if (be_out.empty()) {
        std::cout << csv;
      } else {
        pansharp::write_file_bytes(
            be_out, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
        say(g, "wrote " + be_out);
      }
    }
  } catch (const pansharp::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const pansharp::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pansharp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pansharp::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}

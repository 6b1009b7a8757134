#include <benchmark/benchmark.h>

#include <random>

#include "pansharp/classical.hpp"
#include "pansharp/hmcnn.hpp"
#include "pansharp/isodata.hpp"
#include "pansharp/metrics.hpp"
#include "pansharp/ops.hpp"
#include "pansharp/synth.hpp"

using namespace pansharp;

namespace {

const SyntheticScene& scene() {
  static const SyntheticScene s = synthesize_scene({256, 256, 7});
  return s;
}

const Raster& lrms() {
  static const Raster r = downsample(scene().hrms, ScaleFactor(4));
  return r;
}

Tensor random_tensor(Shape s, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(s.numel());
  for (double& x : v) x = u(rng);
  return Tensor::from(s, std::move(v));
}

void BM_Upsample(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(upsample(lrms(), ScaleFactor(4)));
}
BENCHMARK(BM_Upsample)->Unit(benchmark::kMillisecond);

void BM_Classical(benchmark::State& st) {
  const auto m = static_cast<classical::Method>(st.range(0));
  st.SetLabel(std::string(classical::to_string(m)));
  for (auto _ : st)
    benchmark::DoNotOptimize(classical::fuse(m, {lrms(), scene().pan, ScaleFactor(4)}));
}
BENCHMARK(BM_Classical)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_Conv3x3(benchmark::State& st) {
  const auto c = static_cast<std::size_t>(st.range(0));
  const Tensor x = random_tensor({1, c, 64, 64}, 1);
  const Tensor w = random_tensor({c, c, 3, 3}, 2);
  const Tensor b = Tensor::zeros({c, 1, 1, 1});
  Tape tape(false);
  for (auto _ : st) benchmark::DoNotOptimize(ops::conv2d(tape, x, w, b));
}
BENCHMARK(BM_Conv3x3)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EvaluateReduced(benchmark::State& st) {
  const Raster fused = classical::fuse(classical::Method::Gs, {lrms(), scene().pan, ScaleFactor(4)}).fused;
  for (auto _ : st)
    benchmark::DoNotOptimize(
        metrics::evaluate_all({fused, &scene().hrms, lrms(), scene().pan, ScaleFactor(4)}));
}
BENCHMARK(BM_EvaluateReduced)->Unit(benchmark::kMillisecond);

void BM_Isodata(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(isodata::classify(scene().hrms, {}));
}
BENCHMARK(BM_Isodata)->Unit(benchmark::kMillisecond);

void BM_HmcnnPredict(benchmark::State& st) {
  hmcnn::HmcnnConfig cfg;
  const ParameterSet w = hmcnn::init_weights(cfg, 1);
  const Raster l = downsample(lrms(), ScaleFactor(4));
  const Raster p = downsample(scene().pan, ScaleFactor(4));
  for (auto _ : st) benchmark::DoNotOptimize(hmcnn::predict(l, p, w, cfg));
}
BENCHMARK(BM_HmcnnPredict)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "scoped/analytic.hpp"
#include "scoped/evaluation.hpp"
#include "scoped/mlp.hpp"
#include "scoped/typicality.hpp"

using namespace scoped;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

MlpDenoiser make_mlp(std::size_t dim, std::uint32_t width) {
  MlpSpec spec;
  spec.hidden = {width, width, width};
  return MlpDenoiser::create(dim, spec, 1);
}

const NoiseLevel kLevel = continuous_level(0.3);

void BM_MlpForward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto model = make_mlp(dim, static_cast<std::uint32_t>(state.range(1)));
  const auto x = randn(dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(x, kLevel));
}
BENCHMARK(BM_MlpForward)->Args({8, 64})->Args({32, 128})->Args({64, 256});

void BM_MlpJvp(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto model = make_mlp(dim, static_cast<std::uint32_t>(state.range(1)));
  const auto x = randn(dim, 2);
  const auto v = randn(dim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(model.jvp(x, kLevel, v));
}
BENCHMARK(BM_MlpJvp)->Args({8, 64})->Args({32, 128})->Args({64, 256});

void BM_GmmJvp(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 16;
  std::vector<std::vector<double>> means;
  for (std::size_t i = 0; i < k; ++i) means.push_back(randn(dim, 10 + i));
  const GmmScore model(std::vector<double>(k, 1.0 / static_cast<double>(k)), means, std::vector<double>(k, 0.5));
  const auto x = randn(dim, 2);
  const auto v = randn(dim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(model.jvp(x, kLevel, v));
}
BENCHMARK(BM_GmmJvp)->Arg(2)->Arg(8)->Arg(32);

void BM_HutchinsonTrace(benchmark::State& state) {
  const auto model = make_mlp(16, 128);
  const auto x = randn(16, 2);
  TypicalityConfig cfg;
  cfg.num_probes = static_cast<std::uint32_t>(state.range(0));
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(hutchinson_trace(model, x, kLevel, cfg, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HutchinsonTrace)->Arg(1)->Arg(4)->Arg(16);

void BM_ScoreBatch(benchmark::State& state) {
  const auto model = make_mlp(16, 128);
  const Dataset data(16, randn(16 * 512, 4));
  const std::vector<NoiseLevel> levels{kLevel};
  const TypicalityConfig cfg;
  const auto workers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(score_batch(model, data, levels, cfg, Domain::kScore, workers));
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_ScoreBatch)->Arg(1)->Arg(4)->UseRealTime();

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto id = randn(n, 6);
  auto ood = randn(n, 7);
  for (auto& v : ood) v += 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(auroc(id, ood));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(8)->Range(1 << 9, 1 << 18)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();

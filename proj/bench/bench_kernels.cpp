// Parallel kernels against their serial references.
//
//   ./bench_kernels --benchmark_filter=Maxima

#include "pdsape/ape.hpp"
#include "pdsape/bootstrap.hpp"
#include "pdsape/simulation.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace pdsape;

namespace {

MatrixXd random_scores(Index G, Index K) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  MatrixXd S(G, K);
  for (Index g = 0; g < G; ++g)
    for (Index k = 0; k < K; ++k) S(g, k) = z(rng);
  return S;
}

void MaximaSerial(benchmark::State& state) {
  const auto S = random_scores(state.range(0), 9);
  const VectorXd scale = VectorXd::Ones(9);
  for (auto _ : state) benchmark::DoNotOptimize(multiplier_maxima_serial(S, scale, 1000, 7));
  state.SetItemsProcessed(state.iterations() * 1000);
}

void MaximaParallel(benchmark::State& state) {
  const auto S = random_scores(state.range(0), 9);
  const VectorXd scale = VectorXd::Ones(9);
  for (auto _ : state) benchmark::DoNotOptimize(multiplier_maxima(S, scale, 1000, 7, 0));
  state.SetItemsProcessed(state.iterations() * 1000);
}

void Nuisance(benchmark::State& state) {
  const auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, 0.5, 200, 500, 300, 3));
  std::vector<Index> targets{1, 2, 3, 4, 5, 6, 7, 8, 9};
  PipelineConfig cfg;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_nuisance(ds, targets, cfg));
}

}  // namespace

BENCHMARK(MaximaSerial)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(MaximaParallel)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(Nuisance)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

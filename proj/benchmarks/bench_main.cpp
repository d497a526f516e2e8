#include <benchmark/benchmark.h>

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/design.hpp"
#include "mocrisk/estimation.hpp"
#include "mocrisk/simulation.hpp"

using namespace mocrisk;

namespace {

const InspectionGrid kGrid{{0.2, 0.3, 0.4}};
const Theta kTheta{4.5, 2.5, 3.5};

void BM_CellTable(benchmark::State& state) {
  std::vector<double> times;
  for (int i = 1; i <= state.range(0); ++i) times.push_back(0.05 * i);
  const InspectionGrid grid(times);
  for (auto _ : state) benchmark::DoNotOptimize(cell_table(kTheta, grid));
}
BENCHMARK(BM_CellTable)->Arg(3)->Arg(10)->Arg(50);

void BM_Fit(benchmark::State& state) {
  const TuningBeta beta(static_cast<double>(state.range(0)) / 10.0);
  Rng rng = make_rng(1, {1});
  const CountData data = sample_counts(kTheta, kGrid, 20, rng);
  FitConfig config;
  config.initial_theta = kTheta;
  config.learning_rate = 0.002;
  for (auto _ : state) benchmark::DoNotOptimize(fit(kGrid, data, beta, config));
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_Sandwich(benchmark::State& state) {
  const TuningBeta beta(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(sandwich(kTheta, kGrid, beta));
}
BENCHMARK(BM_Sandwich);

void BM_Nsga2Generation(benchmark::State& state) {
  GaConfig config;
  config.population_size = static_cast<std::size_t>(state.range(0));
  config.generations = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nsga2_run(Theta(0.15, 0.02, 0.07), TuningBeta(0.5), CostModel{}, config));
  }
}
BENCHMARK(BM_Nsga2Generation)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

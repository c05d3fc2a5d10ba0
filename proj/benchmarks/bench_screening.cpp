#include <benchmark/benchmark.h>

#include "factorial/rng.hpp"
#include "factorial/screening.hpp"
#include "factorial/simulation.hpp"

namespace {

factorial::ArmTable reference_arms(int K, std::int64_t n0) {
  std::mt19937_64 rng = factorial::substream(17, 0);
  std::vector<std::pair<factorial::FactorSet, double>> effects;
  for (factorial::FactorSet s : factorial::first_five_effect_sets(K))
    effects.emplace_back(s, 0.4);
  const auto mu = factorial::mu_from_effects(effects, K);
  const factorial::DesignSpec design = factorial::uniform_design(K, n0);
  const factorial::ScienceTable science = factorial::gen_science_table(
      mu, design.total(), factorial::Dgp::shifted_exponential, rng);
  return factorial::summarize(
      factorial::reveal(science, factorial::assign(design, K, rng)));
}

void BM_ForwardScreen(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const factorial::ArmTable arms = reference_arms(K, 8);
  factorial::ScreeningConfig config;
  config.max_level = 3;
  for (auto _ : state) {
    auto trace = factorial::forward_screen(arms, config);
    benchmark::DoNotOptimize(trace);
  }
}
BENCHMARK(BM_ForwardScreen)->DenseRange(6, 10, 1);

void BM_NaiveScreen(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const factorial::ArmTable arms = reference_arms(K, 8);
  for (auto _ : state) {
    auto model =
        factorial::naive_screen(arms, factorial::SStep::bonferroni_t, 0.05);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_NaiveScreen)->DenseRange(6, 10, 1);

void BM_EnumerationOracle(benchmark::State& state) {
  std::mt19937_64 rng = factorial::substream(23, 0);
  const std::vector<double> mu = {0.0, 1.0, -1.0, 0.5};
  const factorial::ScienceTable science = factorial::gen_science_table(
      mu, 8, factorial::Dgp::shifted_exponential, rng);
  const factorial::DesignSpec design = factorial::uniform_design(2, 2);
  for (auto _ : state) {
    auto oracle = factorial::enumerate_assignments(science, design);
    benchmark::DoNotOptimize(oracle);
  }
}
BENCHMARK(BM_EnumerationOracle);

}  // namespace

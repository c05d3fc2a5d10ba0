#include <benchmark/benchmark.h>

#include <vector>

#include "factorial/design.hpp"
#include "factorial/estimation.hpp"
#include "factorial/rng.hpp"

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng = factorial::substream(seed, 0);
  std::vector<double> v(n);
  for (double& x : v) x = factorial::uniform01(rng);
  return v;
}

void BM_EffectTransform(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto v = random_vector(std::size_t{1} << K, 1);
  for (auto _ : state) {
    auto tau = factorial::effect_transform(v, K);
    benchmark::DoNotOptimize(tau);
  }
  state.SetComplexityN(1 << K);
}
BENCHMARK(BM_EffectTransform)->DenseRange(4, 16, 2)->Complexity(benchmark::oNLogN);

// Dense reference product for contrast: the quadratic baseline the transform
// replaces.
void BM_DenseTransform(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const std::size_t Q = std::size_t{1} << K;
  const auto v = random_vector(Q, 2);
  const factorial::ContrastMatrix g(K);
  std::vector<double> out(Q);
  for (auto _ : state) {
    std::size_t pos = 0;
    for (factorial::FactorSet s : g.column_sets()) {
      double acc = 0.0;
      for (std::size_t r = 0; r < Q; ++r)
        acc += factorial::contrast_value(s, factorial::treatment_from_row(r, K)) * v[r];
      out[pos++] = acc / static_cast<double>(Q);
    }
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_DenseTransform)->DenseRange(4, 10, 2);

void BM_ProjectWeight(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  factorial::WeightVector f =
      factorial::WeightVector::custom(K, random_vector(std::size_t{1} << K, 3));
  factorial::WorkingModel model;
  for (int a = 1; a <= std::min(K, 5); ++a) model.add(factorial::FactorSet::of({a}));
  for (auto _ : state) {
    auto projected = factorial::project_weight(f, model);
    benchmark::DoNotOptimize(projected);
  }
}
BENCHMARK(BM_ProjectWeight)->DenseRange(6, 14, 2);

}  // namespace

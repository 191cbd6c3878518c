#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "riskphase/pelt.hpp"

namespace {

// Level flips every 50 points, so change count grows with n.
std::vector<double> steps(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 3.0 * static_cast<double>((i / 50) % 2) + g(rng);
  return x;
}

void BM_PeltDetect(benchmark::State& state) {
  const auto x = steps(static_cast<std::size_t>(state.range(0)));
  const double pen = riskphase::penalty_formula(riskphase::PenaltyLevel::Moderate, x.size(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::pelt_detect(x, pen));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PeltDetect)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_PenaltySweep(benchmark::State& state) {
  const auto x = steps(103);
  const auto grid = riskphase::default_penalty_grid();
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::penalty_sweep(x, grid));
}
BENCHMARK(BM_PenaltySweep);

}  // namespace

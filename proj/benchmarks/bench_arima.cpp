#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "riskphase/forecast.hpp"

namespace {

std::vector<double> ima(std::size_t n) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> x;
  double level = 0, prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = g(rng);
    level += e - 0.4 * prev;
    prev = e;
    x.push_back(level);
  }
  return x;
}

void BM_ArimaFit(benchmark::State& state) {
  const auto x = ima(103);
  const riskphase::ArimaOrder order{static_cast<int>(state.range(0)), 1, static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::arima_fit(x, order));
}
BENCHMARK(BM_ArimaFit)->Args({0, 1})->Args({1, 1})->Args({2, 2});

void BM_ArimaSelect(benchmark::State& state) {
  const auto x = ima(103);
  const auto grid = riskphase::default_arima_grid();
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::arima_select(x, grid));
}
BENCHMARK(BM_ArimaSelect)->Unit(benchmark::kMillisecond);

}  // namespace

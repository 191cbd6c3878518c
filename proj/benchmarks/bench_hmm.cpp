#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "riskphase/hmm.hpp"

namespace {

std::vector<double> regimes(std::size_t n) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 0.5);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = ((i / 20) % 3) * 1.5 + g(rng);
  return x;
}

void BM_HmmFit(benchmark::State& state) {
  const auto x = regimes(static_cast<std::size_t>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::hmm_fit(x, k, 7));
}
BENCHMARK(BM_HmmFit)->ArgsProduct({{103, 400}, {2, 3, 4}});

}  // namespace

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "riskphase/kmeans.hpp"

namespace {

std::vector<riskphase::Point2> blobs(std::size_t n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 0.4);
  std::vector<riskphase::Point2> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = {static_cast<double>(i % 4) + g(rng), static_cast<double>(i % 3) + g(rng)};
  return p;
}

void BM_KMeans(benchmark::State& state) {
  const auto p = blobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::kmeans(p, 4, 11, 10));
}
BENCHMARK(BM_KMeans)->Arg(103)->Arg(1000);

void BM_Silhouette(benchmark::State& state) {
  const auto p = blobs(static_cast<std::size_t>(state.range(0)));
  const auto fit = riskphase::kmeans(p, 4, 11, 1);
  for (auto _ : state) benchmark::DoNotOptimize(riskphase::silhouette(p, fit.labels));
}
BENCHMARK(BM_Silhouette)->Arg(103)->Arg(1000);

}  // namespace

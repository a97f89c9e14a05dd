#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "substate/clustering.hpp"

namespace {

using namespace substate;

std::vector<FeatureVector> vectors(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<FeatureVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Four loose groups so Lloyd has something to find.
    const double shift = static_cast<double>(i % 4) * 3.0;
    auto& v = out[i];
    v.size = 10 + shift + dist(rng);
    v.min = dist(rng);
    v.max = shift + dist(rng);
    v.mean = shift + dist(rng);
    v.median = shift + dist(rng);
    v.std_dev = std::abs(dist(rng));
    v.gini = dist(rng);
  }
  return out;
}

void BM_KMeans(benchmark::State& state) {
  const auto vs = vectors(static_cast<std::size_t>(state.range(0)));
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(vs, k, 0));
}
BENCHMARK(BM_KMeans)->Args({100, 2})->Args({1000, 10})->Args({5000, 50});

}  // namespace

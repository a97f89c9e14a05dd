#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "substate/reduction.hpp"

namespace {

using namespace substate;

ProfileMatrix matrix(std::size_t tests, std::size_t elements, double density) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution on(density);
  std::vector<std::string> test_ids, element_ids;
  for (std::size_t t = 0; t < tests; ++t) test_ids.push_back("t" + std::to_string(t));
  for (std::size_t e = 0; e < elements; ++e) element_ids.push_back("e" + std::to_string(e));
  std::vector<Bits> rows(tests, Bits(elements));
  for (auto& row : rows) {
    for (std::size_t e = 0; e < elements; ++e) row[e] = on(rng);
  }
  return ProfileMatrix(test_ids, element_ids, rows).without_universal();
}

void BM_GreedyReduce(benchmark::State& state) {
  const auto m = matrix(static_cast<std::size_t>(state.range(0)),
                        static_cast<std::size_t>(state.range(1)), 0.05);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(greedy_reduce(m, seed++));
}
BENCHMARK(BM_GreedyReduce)->Args({100, 500})->Args({1000, 5000})->Args({5000, 20000});

}  // namespace

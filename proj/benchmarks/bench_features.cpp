#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <vector>

#include "substate/features.hpp"
#include "substate/trace_ingest.hpp"

namespace {

using namespace substate;

std::vector<double> sample(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist(50.0, 20.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = std::round(dist(rng));
  return xs;
}

void BM_StreamUpdate(benchmark::State& state) {
  const auto xs = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    StreamSummary s;
    for (double x : xs) s.update(x);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StreamUpdate)->Arg(1000)->Arg(100000);

void BM_ExtractFeatures(benchmark::State& state) {
  StreamSummary s;
  for (double x : sample(static_cast<std::size_t>(state.range(0)))) s.update(x);
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(s));
}
BENCHMARK(BM_ExtractFeatures)->Arg(100)->Arg(4000)->Arg(100000);

void BM_IngestTrace(benchmark::State& state) {
  std::ostringstream text;
  const auto xs = sample(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    text << R"({"k":"def","m":"Bench.run()V","o":)" << (i % 16) << R"(,"t":0,"v":)" << xs[i]
         << "}\n";
  }
  const std::string body = text.str();
  for (auto _ : state) {
    std::istringstream in(body);
    benchmark::DoNotOptimize(ingest_test_trace(in, RetentionConfig{}));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(body.size()));
}
BENCHMARK(BM_IngestTrace)->Arg(10000);

}  // namespace

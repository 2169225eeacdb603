#include <benchmark/benchmark.h>

#include <vector>

#include "bgch/retrieval.hpp"

namespace {

struct Fixture {
  bgch::HashCodeTable candidates;
  bgch::HashCodeTable queries;
  bgch::RetrievalIndex index;

  Fixture(std::size_t n, std::size_t bits, std::size_t segments) {
    bgch::Rng rng = bgch::make_stream(1, "bench");
    candidates = bgch::random_code_table(n, bits, segments, rng);
    queries = bgch::random_code_table(64, bits, segments, rng);
    index = bgch::RetrievalIndex(candidates);
  }
};

void BM_HammingScan(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 3);
  std::vector<double> scores(f.index.size());
  std::size_t q = 0;
  for (auto _ : state) {
    f.index.score_all(bgch::query_from_table(f.queries, q++ % 64), scores);
    benchmark::DoNotOptimize(scores.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FloatScan(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 3);
  const bgch::FloatIndex floats(f.index);
  std::vector<double> scores(f.index.size());
  std::size_t q = 0;
  for (auto _ : state) {
    floats.score_all(bgch::query_from_table(f.queries, q++ % 64), scores);
    benchmark::DoNotOptimize(scores.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TopN(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), 256, 3);
  std::size_t q = 0;
  for (auto _ : state) {
    auto r = f.index.topn(bgch::query_from_table(f.queries, q++ % 64), 20);
    benchmark::DoNotOptimize(r.data());
  }
}

}  // namespace

BENCHMARK(BM_HammingScan)->Args({10000, 64})->Args({10000, 256})->Args({100000, 256})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FloatScan)->Args({10000, 64})->Args({10000, 256})->Args({100000, 256})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TopN)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

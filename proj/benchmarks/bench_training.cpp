#include <benchmark/benchmark.h>

#include "bgch/conv_hash.hpp"
#include "bgch/trainer.hpp"

namespace {

bgch::Matrix random_embeddings(std::size_t nodes, int dim) {
  bgch::Rng rng = bgch::make_stream(2, "bench");
  std::normal_distribution<double> normal(0.0, 0.1);
  bgch::Matrix v(static_cast<Eigen::Index>(nodes), dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  return v;
}

void BM_ConvolveStack(benchmark::State& state) {
  const auto g = bgch::planted_partition(500, 500, 10, 0.05, 0.002, 1);
  const auto adj = bgch::normalize(g);
  const auto v = random_embeddings(g.num_nodes(), static_cast<int>(state.range(0)));
  const bgch::Projection p(bgch::Vector::Ones(state.range(0)));
  for (auto _ : state) {
    auto stack = bgch::convolve_stack(adj, v, p, 0.5, 2);
    benchmark::DoNotOptimize(stack.layers.back().data());
  }
}

// One full training run on a small planted graph; the fourier term count
// varies to expose the estimator's per-step cost.
void BM_TrainEpochs(benchmark::State& state) {
  const auto data = bgch::split(bgch::planted_partition(100, 100, 4, 0.3, 0.01, 3), 0.2, 3);
  bgch::TrainConfig cfg;
  cfg.dim = 64;
  cfg.epochs = 5;
  cfg.patience = 0;
  cfg.estimator.terms = static_cast<int>(state.range(0));
  bgch::TrainOptions opt;
  opt.validate_each_epoch = false;
  opt.final_cutoffs = {20};
  for (auto _ : state) {
    auto r = bgch::train(data, cfg, opt);
    benchmark::DoNotOptimize(r.state.embeddings.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvolveStack)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainEpochs)->Arg(1)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

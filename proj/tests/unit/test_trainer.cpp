#include <gtest/gtest.h>

#include "bgch/retrieval.hpp"
#include "bgch/trainer.hpp"
#include "test_support.hpp"

using namespace bgch;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.layers = 2;
  cfg.epochs = 5;
  cfg.batch = 64;
  cfg.patience = 0;
  cfg.seed = 11;
  return cfg;
}

DataSplit small_split() { return split(planted_partition(20, 20, 2, 0.8, 0.05, 3), 0.2, 3); }

}  // namespace

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam opt(1, 3, 0.1);
  Matrix param = Matrix::Zero(1, 3);
  Matrix grad(1, 3);
  grad << 2.0, -0.5, 0.0;
  opt.step(param, grad);
  EXPECT_NEAR(param(0, 0), -0.1, 1e-7);
  EXPECT_NEAR(param(0, 1), 0.1, 1e-7);
  EXPECT_EQ(param(0, 2), 0.0);
  EXPECT_EQ(opt.steps(), 1u);
  EXPECT_THROW(opt.step(param, Matrix::Zero(2, 3)), DimensionError);
}

TEST(Adam, MinimizesQuadratic) {
  Adam opt(1, 2, 0.05);
  Matrix x(1, 2);
  x << 3.0, -2.0;
  for (int i = 0; i < 2000; ++i) opt.step(x, 2.0 * x);
  EXPECT_LT(x.cwiseAbs().maxCoeff(), 1e-2);
}

TEST(NegativeSampler, NeverReturnsObservedItem) {
  std::mt19937_64 gen(1);
  const auto g = bgch::testing::random_graph(30, 40, 0.5, gen);
  NegativeSampler sampler(g);
  Rng rng = make_stream(1, "sampling");
  for (int t = 0; t < 20000; ++t) {
    const auto x = static_cast<NodeId>(t % 30);
    const NodeId y = sampler.sample(x, rng);
    ASSERT_LT(y, 40u);
    ASSERT_FALSE(g.has_edge(x, y));
  }
}

TEST(NegativeSampler, FullyConnectedNodeThrows) {
  const auto g = BipartiteGraph::from_edges(1, 2, {{0, 0}, {0, 1}});
  NegativeSampler sampler(g);
  Rng rng = make_stream(1, "sampling");
  EXPECT_THROW(sampler.sample(0, rng), Error);
}

TEST(Train, SameSeedGivesIdenticalRuns) {
  const auto s = small_split();
  const auto a = train(s, small_config());
  const auto b = train(s, small_config());
  ASSERT_EQ(a.log.size(), 5u);
  EXPECT_EQ(metrics_csv(a.log), metrics_csv(b.log));
  EXPECT_EQ(a.codes, b.codes);
  EXPECT_EQ(a.state.embeddings, b.state.embeddings);
}

TEST(Train, DifferentSeedDiffers) {
  const auto s = small_split();
  auto cfg = small_config();
  const auto a = train(s, cfg);
  cfg.seed += 1;
  EXPECT_NE(train(s, cfg).state.embeddings, a.state.embeddings);
}

TEST(Train, NoFdMatchesZeroEpsilonBitwise) {
  const auto s = small_split();
  auto a_cfg = small_config();
  a_cfg.ablations.no_fd = true;
  auto b_cfg = small_config();
  b_cfg.epsilon = 0.0;
  const auto a = train(s, a_cfg);
  const auto b = train(s, b_cfg);
  EXPECT_EQ(a.state.embeddings, b.state.embeddings);
  EXPECT_EQ(metrics_csv(a.log), metrics_csv(b.log));
}

TEST(Train, LossDecreasesOnPlantedGraph) {
  auto cfg = small_config();
  cfg.epochs = 30;
  const auto r = train(small_split(), cfg);
  EXPECT_LT(r.log.back().loss_total, r.log.front().loss_total);
}

TEST(Train, EveryAblationRuns) {
  const auto s = small_split();
  for (auto name : ablation_names()) {
    auto cfg = small_config();
    cfg.epochs = 2;
    set_ablation(cfg.ablations, name);
    const auto r = train(s, cfg);
    EXPECT_EQ(r.log.size(), 2u) << name;
    EXPECT_EQ(r.codes.nodes(), 40u);
    EXPECT_EQ(r.codes.segments(), cfg.ablations.no_ah_ta ? 1u : 3u);
  }
}

TEST(Train, EmptyTrainingSplitThrows) {
  DataSplit empty;
  empty.n1 = 2;
  empty.n2 = 2;
  EXPECT_THROW(train(empty, small_config()), EmptyGraphError);
}

TEST(Train, InvalidConfigThrows) {
  auto cfg = small_config();
  cfg.ablations.no_rec = cfg.ablations.no_bpr = true;
  EXPECT_THROW(train(small_split(), cfg), ConfigError);
}

TEST(Train, EarlyStoppingHonoursPatience) {
  auto cfg = small_config();
  cfg.epochs = 40;
  cfg.patience = 1;
  const auto r = train(small_split(), cfg);
  if (r.early_stopped) {
    EXPECT_LT(r.log.size(), 40u);
  } else {
    EXPECT_EQ(r.log.size(), 40u);
  }
}

TEST(Train, FinalReportUsesRequestedCutoffs) {
  TrainOptions opt;
  opt.final_cutoffs = {5, 10};
  const auto r = train(small_split(), small_config(), opt);
  EXPECT_EQ(r.final_report.cutoffs, (std::vector<std::size_t>{5, 10}));
}

TEST(Train, TrainingScoresAgreeWithRetrievalScores) {
  const auto s = small_split();
  const auto cfg = small_config();
  const auto r = train(s, cfg);
  const auto g = s.train_graph();
  const auto adj = normalize(g);
  const Projection p(Vector::LinSpaced(cfg.dim, -1.0, 2.0));
  HashingEncoder enc(adj, cfg.encoder_options(), cfg.estimator);
  const auto cache = enc.forward(r.state.embeddings, p);
  const auto table = encode(adj, cfg, r.state.embeddings, p);
  RetrievalIndex index(table, 20, 20);
  for (std::size_t x = 0; x < 20; ++x) {
    const auto q = query_from_table(table, x);
    for (std::size_t y = 0; y < 20; ++y) {
      const double train_score = enc.score(cache, x, 20 + y);
      EXPECT_NEAR(index.score(q, y), train_score, 1e-5 * std::max(1.0, std::abs(train_score)));
    }
  }
}

TEST(Checkpoint, RoundTripIsBitwise) {
  auto cfg = small_config();
  cfg.ablations.learnable_factors = true;
  const auto r = train(small_split(), cfg);
  const auto dir = bgch::testing::temp_dir("checkpoint");
  save_checkpoint(r.state, cfg, dir / "ck.bgck");
  TrainConfig loaded_cfg;
  const auto back = load_checkpoint(dir / "ck.bgck", &loaded_cfg);
  EXPECT_EQ(loaded_cfg, cfg);
  EXPECT_EQ(back.embeddings, r.state.embeddings);
  EXPECT_EQ(back.learned_scales, r.state.learned_scales);
  EXPECT_EQ(back.epoch, r.state.epoch);
  EXPECT_EQ(back.iterations, r.state.iterations);
  EXPECT_EQ(back.embedding_opt.steps(), r.state.embedding_opt.steps());
  EXPECT_EQ(back.embedding_opt.first_moment(), r.state.embedding_opt.first_moment());
  EXPECT_EQ(back.embedding_opt.second_moment(), r.state.embedding_opt.second_moment());
  ASSERT_TRUE(back.scale_opt.has_value());
  EXPECT_EQ(back.scale_opt->second_moment(), r.state.scale_opt->second_moment());
}

TEST(Checkpoint, RejectsGarbage) {
  const auto dir = bgch::testing::temp_dir("checkpoint_bad");
  bgch::testing::write_file(dir / "bad.bgck", "nope");
  EXPECT_THROW(load_checkpoint(dir / "bad.bgck"), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.bgck"), Error);
}

TEST(MetricsCsv, HeaderAndDeterministicWallClock) {
  std::vector<EpochLog> log{{1, 0.5, 0.25, 0.75, 0.1, 0.2, 123.0}};
  const auto csv = metrics_csv(log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,loss_rec,loss_bpr,loss_total,recall@20,ndcg@20,wall_ms");
  EXPECT_EQ(csv.find("123"), std::string::npos);
  EXPECT_NE(metrics_csv(log, true).find("123"), std::string::npos);
}

#include <gtest/gtest.h>

#include "bgch/landscape.hpp"
#include "bgch/trainer.hpp"
#include "test_support.hpp"

using namespace bgch;

namespace {

TrainConfig scan_config() {
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.layers = 2;
  cfg.seed = 5;
  return cfg;
}

double loss_at(const LandscapeGrid& grid, LandscapeVariant variant, double pi, double pj) {
  for (const auto& pt : grid.points) {
    if (pt.variant == variant && pt.p_i == pi && pt.p_j == pj) return pt.loss;
  }
  ADD_FAILURE() << "grid point missing";
  return 0.0;
}

}  // namespace

TEST(LandscapeRange, InclusiveEnd) {
  EXPECT_EQ(landscape_range(-1.0, 1.0, 0.5).size(), 5u);
  EXPECT_EQ(landscape_range(0.0, 0.3, 0.1).size(), 4u);
  EXPECT_THROW(landscape_range(1.0, 0.0, 0.1), ConfigError);
  EXPECT_THROW(landscape_range(0.0, 1.0, 0.0), ConfigError);
}

TEST(LandscapeScan, GridShape) {
  const auto g = planted_partition(10, 10, 2, 0.8, 0.1, 1);
  std::mt19937_64 rng(1);
  const Matrix v0 = bgch::testing::random_matrix(20, 8, rng, 0.1);
  const auto p = landscape_range(-1.0, 1.0, 0.5);
  const auto grid = landscape_scan(g, scan_config(), v0, p);
  EXPECT_EQ(grid.points.size(), 2 * p.size() * p.size());
  const auto csv = grid.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "variant,p_i,p_j,loss");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + grid.points.size());
  EXPECT_GE(grid.range(LandscapeVariant::hashed), 0.0);
}

TEST(LandscapeScan, OriginEqualsUnperturbedObjective) {
  const auto g = planted_partition(10, 10, 2, 0.8, 0.1, 2);
  std::mt19937_64 gen(2);
  const Matrix v0 = bgch::testing::random_matrix(20, 8, gen, 0.1);
  const auto cfg = scan_config();
  const auto grid = landscape_scan(g, cfg, v0, {-0.5, 0.0, 0.5});

  // Rebuild the fixed batch and projection from the same named stream.
  Rng rng = make_stream(cfg.seed, "landscape");
  const Projection proj = power_iterate(v0, cfg.disp_iters, rng);
  TrainingBatch batch;
  batch.per_positive = cfg.negatives;
  batch.positives.assign(g.edges().begin(), g.edges().end());
  NegativeSampler sampler(g);
  for (const Edge& e : batch.positives) batch.negatives.push_back(sampler.sample(e.x, rng));

  const auto adj = normalize(g);
  HashingEncoder hashed(adj, cfg.encoder_options(), cfg.estimator);
  const double expect = evaluate_objective(hashed, hashed.forward(v0, proj), v0, 10, batch, cfg.loss_weights()).total;
  EXPECT_DOUBLE_EQ(loss_at(grid, LandscapeVariant::hashed, 0.0, 0.0), expect);

  auto opts = cfg.encoder_options();
  opts.code_mode = CodeMode::identity;
  opts.scale_mode = ScaleMode::unit;
  HashingEncoder smooth(adj, opts, cfg.estimator);
  const double expect_smooth =
      evaluate_objective(smooth, smooth.forward(v0, proj), v0, 10, batch, cfg.loss_weights()).total;
  EXPECT_DOUBLE_EQ(loss_at(grid, LandscapeVariant::non_hashed, 0.0, 0.0), expect_smooth);
}

TEST(LandscapeScan, Deterministic) {
  const auto g = planted_partition(10, 10, 2, 0.8, 0.1, 3);
  std::mt19937_64 gen(3);
  const Matrix v0 = bgch::testing::random_matrix(20, 8, gen, 0.1);
  const auto p = landscape_range(-0.5, 0.5, 0.25);
  EXPECT_EQ(landscape_scan(g, scan_config(), v0, p).to_csv(), landscape_scan(g, scan_config(), v0, p).to_csv());
}

TEST(LandscapeScan, RejectsMismatchedEmbeddings) {
  const auto g = planted_partition(10, 10, 2, 0.8, 0.1, 4);
  EXPECT_THROW(landscape_scan(g, scan_config(), Matrix::Ones(5, 8), {0.0}), DimensionError);
}

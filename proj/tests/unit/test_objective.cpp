#include <gtest/gtest.h>

#include "bgch/objective.hpp"
#include "test_support.hpp"

using namespace bgch;

namespace {

struct Fixture {
  BipartiteGraph graph = BipartiteGraph::from_edges(3, 3, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 0}, {2, 2}});
  NormalizedAdjacency adj = normalize(graph);
  TrainingBatch batch{{{0, 0}, {1, 2}, {2, 0}, {0, 1}}, {2, 1, 0, 0, 1, 2, 0, 2}, 2};
};

}  // namespace

TEST(ReconstructionLoss, ZeroDotExamples) {
  Matrix v = Matrix::Zero(2, 3);
  EXPECT_NEAR(reconstruction_loss(v, 1, {{{0, 0}}, {}, 0}), 0.69315, 1e-5);
  // One positive plus one negative, both at zero dot, for one distinct x.
  Matrix w = Matrix::Zero(3, 3);
  EXPECT_NEAR(reconstruction_loss(w, 1, {{{0, 0}}, {1}, 1}), 2 * 0.69315, 1e-5);
}

TEST(ReconstructionLoss, SaturatesToZero) {
  Matrix v(2, 1);
  v << 100, 100;
  EXPECT_LT(reconstruction_loss(v, 1, {{{0, 0}}, {}, 0}), 1e-6);
  Matrix grad = Matrix::Zero(2, 1);
  reconstruction_loss(v, 1, {{{0, 0}}, {}, 0}, &grad);
  EXPECT_TRUE(grad.isZero(0.0));
}

TEST(ReconstructionLoss, SinglePositiveGradientIsLogistic) {
  std::mt19937_64 rng(1);
  const Matrix v = bgch::testing::random_matrix(2, 5, rng);
  Matrix grad = Matrix::Zero(2, 5);
  reconstruction_loss(v, 1, {{{0, 0}}, {}, 0}, &grad);
  const double s = 1.0 / (1.0 + std::exp(-v.row(0).dot(v.row(1))));
  EXPECT_LT((grad.row(0) - (s - 1.0) * v.row(1)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((grad.row(1) - (s - 1.0) * v.row(0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ReconstructionLoss, BatchShapeChecked) {
  EXPECT_THROW(reconstruction_loss(Matrix::Zero(2, 2), 1, {{{0, 0}}, {0, 0}, 1}), DimensionError);
}

TEST(BprLoss, Examples) {
  EXPECT_NEAR(bpr_loss(std::vector<double>{3.0}, std::vector<double>{1.0}), 0.12693, 1e-5);
  EXPECT_NEAR(bpr_loss(std::vector<double>{4.0}, std::vector<double>{4.0}), 0.69315, 1e-5);
  EXPECT_LT(bpr_loss(std::vector<double>{1e6}, std::vector<double>{0.0}), 1e-6);
  EXPECT_NEAR(bpr_loss(std::vector<double>{0.0, 3.0}, std::vector<double>{0.0, 1.0}), (0.69315 + 0.12693) / 2, 1e-5);
  EXPECT_THROW(bpr_loss(std::vector<double>{1.0}, std::vector<double>{}), DimensionError);
}

TEST(TotalLoss, Arithmetic) {
  const Matrix zero = Matrix::Zero(2, 2);
  EXPECT_DOUBLE_EQ(total_loss(1.0, 2.0, zero, {0.5, 0.0, true, true}), 2.0);
  const Matrix ten = Matrix::Constant(4, 25, 1.0);  // ||V||^2 = 100
  EXPECT_NEAR(total_loss(0.0, 0.0, ten, {1.0, 1e-4, true, true}), 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(total_loss(1.5, 7.0, ten, {1.0, 1e-4, true, false}), 1.5 + 1e-4 * 100);
  EXPECT_DOUBLE_EQ(total_loss(1.5, 7.0, ten, {1.0, 1e-4, false, true}), 7.0 + 1e-4 * 100);
}

TEST(Objective, L2GradientIsExactlyTwoLambdaV) {
  Fixture f;
  std::mt19937_64 rng(2);
  const Matrix v0 = bgch::testing::random_matrix(6, 4, rng);
  HashingEncoder enc(f.adj, {2, 0.5, true}, {});
  const auto cache = enc.forward(v0, Projection(Vector::Ones(4)));
  ObjectiveGradients g;
  const auto loss = evaluate_objective(enc, cache, v0, 3, f.batch, {1.0, 0.25, false, false}, &g);
  EXPECT_EQ(g.embeddings, 2.0 * 0.25 * v0);
  EXPECT_EQ(loss.total, 0.25 * v0.squaredNorm());
  EXPECT_EQ(loss.l2, v0.squaredNorm());
}

TEST(Objective, SurrogateObjectiveMatchesFiniteDifferences) {
  Fixture f;
  std::mt19937_64 rng(3);
  const Matrix v0 = bgch::testing::random_matrix(6, 5, rng, 0.3);
  const std::optional<Projection> p = Projection(bgch::testing::random_matrix(5, 1, rng));
  HashingEncoder enc(f.adj, {2, 0.5, true, ScaleMode::computed, CodeMode::surrogate}, {});
  const LossWeights w{1.0, 1e-2, true, true};
  ObjectiveGradients g;
  evaluate_objective(enc, enc.forward(v0, p), v0, 3, f.batch, w, &g);
  auto loss_at = [&](const Matrix& v) { return evaluate_objective(enc, enc.forward(v, p), v, 3, f.batch, w).total; };
  for (Eigen::Index i = 0; i < v0.size(); ++i) {
    Matrix plus = v0, minus = v0;
    plus.data()[i] += 1e-6;
    minus.data()[i] -= 1e-6;
    const double fd = (loss_at(plus) - loss_at(minus)) / 2e-6;
    EXPECT_LT(bgch::testing::rel_err(g.embeddings.data()[i], fd, 1e-3), 1e-4) << "coordinate " << i;
  }
}

TEST(Objective, BreakdownMatchesParts) {
  Fixture f;
  std::mt19937_64 rng(4);
  const Matrix v0 = bgch::testing::random_matrix(6, 8, rng);
  HashingEncoder enc(f.adj, {1, 0.0, true}, {});
  const auto cache = enc.forward(v0, std::nullopt);
  const LossWeights w{0.7, 1e-3, true, true};
  const auto loss = evaluate_objective(enc, cache, v0, 3, f.batch, w);
  EXPECT_DOUBLE_EQ(loss.rec, reconstruction_loss(v0, 3, f.batch));
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < f.batch.positives.size(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      pos.push_back(enc.score(cache, f.batch.positives[i].x, 3 + f.batch.positives[i].y));
      neg.push_back(enc.score(cache, f.batch.positives[i].x, 3 + f.batch.negatives[i * 2 + j]));
    }
  }
  EXPECT_DOUBLE_EQ(loss.bpr, bpr_loss(pos, neg));
  EXPECT_DOUBLE_EQ(loss.total, loss.rec + 0.7 * loss.bpr + 1e-3 * v0.squaredNorm());
}

TEST(Objective, NonFiniteInputDiverges) {
  Fixture f;
  Matrix v0 = Matrix::Ones(6, 2);
  v0(0, 0) = std::numeric_limits<double>::infinity();
  HashingEncoder enc(f.adj, {0, 0.0, true, ScaleMode::unit, CodeMode::identity}, {});
  ObjectiveGradients g;
  EXPECT_THROW(evaluate_objective(enc, enc.forward(v0, std::nullopt), v0, 3, f.batch, {}, &g), DivergenceError);
}

#include <gtest/gtest.h>

#include <algorithm>

#include <Eigen/SVD>

#include "bgch/dispersion.hpp"
#include "bgch/parallel.hpp"
#include "test_support.hpp"

using namespace bgch;

TEST(PowerIterate, HandEvaluatedStep) {
  Matrix v(2, 2);
  v << 2, 0, 0, 1;
  Vector start(2);
  start << 1, 1;
  const Projection p = power_iterate(v, 1, start);
  EXPECT_DOUBLE_EQ(p.vector()[0], 4.0);
  EXPECT_DOUBLE_EQ(p.vector()[1], 1.0);
}

TEST(PowerIterate, ZeroIterationsKeepsStart) {
  std::mt19937_64 rng(1);
  const Matrix v = bgch::testing::random_matrix(5, 3, rng);
  Vector start(3);
  start << 0.3, -1.2, 2.0;
  EXPECT_EQ(power_iterate(v, 0, start).vector(), start);
}

TEST(PowerIterate, MovesTowardTopSingularVector) {
  std::mt19937_64 rng(2);
  int closer = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix v = bgch::testing::random_matrix(8, 4, rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeFullV);
    const Vector top = svd.matrixV().col(0);
    const Vector start = bgch::testing::random_matrix(4, 1, rng);
    const Vector p3 = power_iterate(v, 3, start).vector();
    auto angle = [&](const Vector& x) { return std::acos(std::min(1.0, std::abs(x.normalized().dot(top)))); };
    if (angle(p3) < angle(start)) ++closer;
  }
  EXPECT_EQ(closer, 50);
}

TEST(PowerIterate, SeededDrawIsReproducible) {
  std::mt19937_64 rng(3);
  const Matrix v = bgch::testing::random_matrix(6, 4, rng);
  Rng a = make_stream(9, "dispersion");
  Rng b = make_stream(9, "dispersion");
  EXPECT_EQ(power_iterate(v, 2, a).vector(), power_iterate(v, 2, b).vector());
}

TEST(PowerIterate, AllZeroMatrixIsDegenerate) {
  Rng rng = make_stream(1, "dispersion");
  EXPECT_THROW(power_iterate(Matrix::Zero(4, 3), 1, rng), DegenerateProjectionError);
}

TEST(PowerIterate, StartLengthMismatchThrows) {
  EXPECT_THROW(power_iterate(Matrix::Ones(3, 2), 1, Vector::Ones(3)), DimensionError);
}

TEST(Projection, ZeroVectorRejected) { EXPECT_THROW(Projection(Vector::Zero(3)), DegenerateProjectionError); }

TEST(Projection, Idempotent) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const Projection p(bgch::testing::random_matrix(6, 1, rng));
    const Vector v = bgch::testing::random_matrix(6, 1, rng);
    EXPECT_LT((p.apply(p.apply(v)) - p.apply(v)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Disperse, EpsilonZeroIsIdentity) {
  std::mt19937_64 rng(5);
  const Matrix v = bgch::testing::random_matrix(5, 3, rng);
  const Projection p(Vector::Ones(3));
  EXPECT_EQ(disperse(v, p, 0.0), v);
}

TEST(Disperse, HandEvaluatedRankOne) {
  Vector pv(2);
  pv << 3, 4;
  const Matrix out = disperse(Matrix::Identity(2, 2), Projection(pv), 0.5);
  EXPECT_NEAR(out(0, 0), 0.82, 1e-15);
  EXPECT_NEAR(out(0, 1), -0.24, 1e-15);
  EXPECT_NEAR(out(1, 0), -0.24, 1e-15);
  EXPECT_NEAR(out(1, 1), 0.68, 1e-15);
}

TEST(Disperse, TwiceEqualsSquaredOperator) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const Matrix v = bgch::testing::random_matrix(5, 3, rng);
    const Projection p(bgch::testing::random_matrix(3, 1, rng));
    const double eps = 0.3;
    const Matrix twice = disperse(disperse(v, p, eps), p, eps);
    const Matrix once = disperse(v, p, 2 * eps - eps * eps);
    EXPECT_LT((twice - once).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Disperse, FrobeniusNormDoesNotGrow) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const Matrix v = bgch::testing::random_matrix(7, 4, rng);
    const Projection p(bgch::testing::random_matrix(4, 1, rng));
    EXPECT_LE(disperse(v, p, 0.9).norm(), v.norm() + 1e-12);
  }
}

TEST(Disperse, CommutesWithLeftMultiplication) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = bgch::testing::random_matrix(6, 6, rng);
    const Matrix v = bgch::testing::random_matrix(6, 3, rng);
    const Projection p(bgch::testing::random_matrix(3, 1, rng));
    const Matrix lhs = a * disperse(v, p, 0.5);
    const Matrix rhs = disperse(a * v, p, 0.5);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Disperse, ShapeMismatchThrows) {
  EXPECT_THROW(disperse(Matrix::Ones(3, 4), Projection(Vector::Ones(3)), 0.5), DimensionError);
}

TEST(DispersionConfig, Validation) {
  EXPECT_NO_THROW((DispersionConfig{1, 0.5}.validate(2)));
  EXPECT_NO_THROW((DispersionConfig{1, 0.0}.validate(2)));
  EXPECT_THROW((DispersionConfig{3, 0.5}.validate(2)), ConfigError);
  EXPECT_THROW((DispersionConfig{1, 1.0}.validate(2)), ConfigError);
  EXPECT_THROW((DispersionConfig{1, -0.1}.validate(2)), ConfigError);
}

TEST(Shrinkage, ThreeDescendingValuesAscend) {
  ShrinkageOptions o;
  o.rows = 6;
  o.cols = 3;
  o.singular_values = {3, 2, 1};
  o.epsilon = 0.5;
  o.iterations = 1;
  o.samples = 10000;
  const auto r = estimate_dispersion_shrinkage(o);
  EXPECT_LT(r.mu_hat[0], r.mu_hat[1]);
  EXPECT_LT(r.mu_hat[1], r.mu_hat[2]);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LT(r.closed_form_max_deviation, 1e-10);
}

TEST(Shrinkage, EpsilonZeroGivesOnes) {
  ShrinkageOptions o;
  o.epsilon = 0.0;
  o.samples = 1000;
  const auto r = estimate_dispersion_shrinkage(o);
  for (double m : r.mu_hat) EXPECT_EQ(m, 1.0);
}

TEST(Shrinkage, EqualValuesGiveEqualShrinkage) {
  ShrinkageOptions o;
  o.rows = 8;
  o.cols = 4;
  o.singular_values = {2, 2, 2, 2};
  o.samples = 10000;
  const auto r = estimate_dispersion_shrinkage(o);
  EXPECT_TRUE(r.repeated_sigma);
  EXPECT_EQ(r.violations, 0u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(r.mu_hat[k], 1.0 - 0.5 / 4.0, 5 * r.stderr_mu[k] + 1e-12);
}

TEST(Shrinkage, CsvSchema) {
  ShrinkageOptions o;
  o.samples = 1000;
  const auto csv = estimate_dispersion_shrinkage(o).to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,sigma_k,mu_hat_k,stderr_k");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + o.cols);
}

TEST(Shrinkage, IndependentOfThreadCount) {
  ShrinkageOptions o;
  o.samples = 2000;
  set_max_threads(1);
  const auto a = estimate_dispersion_shrinkage(o);
  set_max_threads(4);
  const auto b = estimate_dispersion_shrinkage(o);
  set_max_threads(1);
  EXPECT_EQ(a.mu_hat, b.mu_hat);
  EXPECT_EQ(a.stderr_mu, b.stderr_mu);
}

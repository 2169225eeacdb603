#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "bgch/estimators.hpp"
#include "bgch/types.hpp"
#include "test_support.hpp"

using namespace bgch;

namespace {

EstimatorSpec fourier(int n, double h = 1.0) {
  EstimatorSpec s;
  s.kind = EstimatorKind::fourier;
  s.terms = n;
  s.half_period = h;
  return s;
}

std::vector<EstimatorSpec> all_kinds() {
  std::vector<EstimatorSpec> out;
  for (auto k : {EstimatorKind::fourier, EstimatorKind::ste, EstimatorKind::tanh, EstimatorKind::sigmoid,
                 EstimatorKind::signswish}) {
    EstimatorSpec s;
    s.kind = k;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(SurrogateValue, Examples) {
  EXPECT_NEAR(surrogate_value(fourier(1), 0.5), 4.0 / std::numbers::pi, 1e-12);
  for (const auto& s : all_kinds()) EXPECT_EQ(surrogate_value(s, 0.0), 0.0) << to_string(s.kind);
}

TEST(SurrogateValue, NanThrows) {
  for (const auto& s : all_kinds()) EXPECT_THROW(surrogate_value(s, std::nan("")), Error);
}

TEST(SurrogateValue, PartialSumsApproachOne) {
  double prev = 1e9;
  for (int n : {1, 3, 5, 7, 9}) {
    const double err = std::abs(surrogate_value(fourier(n), 0.5) - 1.0);
    EXPECT_LT(err, prev) << n;
    prev = err;
  }
  EXPECT_LT(prev, 0.1);
}

TEST(SurrogateValue, OddFunction) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const auto& s : all_kinds()) {
    for (int t = 0; t < 50; ++t) {
      const double phi = u(rng);
      EXPECT_NEAR(surrogate_value(s, -phi), -surrogate_value(s, phi), 1e-12);
      EXPECT_NEAR(surrogate_grad(s, -phi), surrogate_grad(s, phi), 1e-12);
    }
  }
}

TEST(SurrogateGrad, Examples) {
  EXPECT_NEAR(surrogate_grad(fourier(5), 0.0), 12.0, 1e-12);
  EXPECT_NEAR(surrogate_grad(fourier(1, 2.0), 1.0), 0.0, 1e-12);
  EstimatorSpec ste;
  ste.kind = EstimatorKind::ste;
  EXPECT_EQ(surrogate_grad(ste, 0.3), 1.0);
  EXPECT_EQ(surrogate_grad(ste, 1.5), 0.0);
}

TEST(SurrogateGrad, MatchesCentralDifferences) {
  std::mt19937_64 rng(2);
  for (auto s : all_kinds()) {
    if (s.kind == EstimatorKind::ste) continue;  // piecewise linear, derivative is exact by construction
    for (double h : {1.0, 2.5}) {
      s.half_period = h;
      std::uniform_real_distribution<double> u(-0.9 * h, 0.9 * h);
      for (int t = 0; t < 100; ++t) {
        const double phi = u(rng);
        const double step = 1e-5;
        const double fd = (surrogate_value(s, phi + step) - surrogate_value(s, phi - step)) / (2 * step);
        const double g = surrogate_grad(s, phi);
        EXPECT_LT(bgch::testing::rel_err(g, fd, 1e-2), 1e-5) << to_string(s.kind) << " phi=" << phi;
      }
    }
  }
}

TEST(SurrogateGrad, HarmonicCounting) {
  EXPECT_EQ(fourier(4).harmonics(), (std::vector<int>{1, 3}));
  EXPECT_EQ(fourier(5).harmonics(), (std::vector<int>{1, 3, 5}));
  auto s = fourier(3);
  s.counting = TermCounting::harmonics;
  EXPECT_EQ(s.harmonics(), (std::vector<int>{1, 3, 5}));
}

TEST(SurrogateGrad, InvalidSpecRejected) {
  EXPECT_THROW(fourier(0).validate(), ConfigError);
  EXPECT_THROW(fourier(3, 0.0).validate(), ConfigError);
  EXPECT_NO_THROW(fourier(4).validate());
}

TEST(BackpropSign, Examples) {
  const std::vector<double> ones(4, 1.0), zeros(4, 0.0);
  EXPECT_EQ(backprop_sign(fourier(1), ones, zeros), std::vector<double>(4, 4.0));
  const std::vector<double> phi{0.1, -0.4, 0.7, 0.0};
  EXPECT_EQ(backprop_sign(fourier(3), zeros, phi), zeros);
}

TEST(BackpropSign, ElementwiseProductOfGrad) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> up(64), phi(64);
  for (auto& v : up) v = n(rng);
  for (auto& v : phi) v = 0.5 * n(rng);
  for (const auto& s : all_kinds()) {
    const auto out = backprop_sign(s, up, phi);
    for (std::size_t i = 0; i < up.size(); ++i) EXPECT_EQ(out[i], up[i] * surrogate_grad(s, phi[i]));
  }
  EXPECT_THROW(backprop_sign(fourier(1), std::vector<double>(3), std::vector<double>(4)), DimensionError);
}

TEST(EstimatorNames, RoundTrip) {
  for (const auto& s : all_kinds()) EXPECT_EQ(parse_estimator_kind(to_string(s.kind)), s.kind);
  EXPECT_THROW(parse_estimator_kind("bogus"), ConfigError);
}

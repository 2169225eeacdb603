#include "bgch/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "bgch/types.hpp"

namespace bgch {
namespace {

constexpr double kFourierClamp = 0.95;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void EstimatorSpec::validate() const {
  if (kind == EstimatorKind::fourier) {
    if (terms < 1) throw ConfigError(fmt::format("fourier term count must be >= 1, got {}", terms));
    if (!(half_period > 0.0)) throw ConfigError("fourier half period H must be positive");
  }
  if (kind == EstimatorKind::ste && !(ste_clip > 0.0)) throw ConfigError("ste clip must be positive");
  if (kind == EstimatorKind::tanh && !(tanh_temperature > 0.0)) throw ConfigError("tanh temperature must be positive");
  if (kind == EstimatorKind::sigmoid && !(sigmoid_beta > 0.0)) throw ConfigError("sigmoid beta must be positive");
  if (kind == EstimatorKind::signswish && !(signswish_beta > 0.0)) throw ConfigError("signswish beta must be positive");
}

std::vector<int> EstimatorSpec::harmonics() const {
  std::vector<int> out;
  if (counting == TermCounting::odd_bound) {
    for (int i = 1; i <= terms; i += 2) out.push_back(i);
  } else {
    for (int k = 0; k < terms; ++k) out.push_back(2 * k + 1);
  }
  return out;
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::fourier: return "fourier";
    case EstimatorKind::ste: return "ste";
    case EstimatorKind::tanh: return "tanh";
    case EstimatorKind::sigmoid: return "sigmoid";
    case EstimatorKind::signswish: return "signswish";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  for (auto kind : {EstimatorKind::fourier, EstimatorKind::ste, EstimatorKind::tanh, EstimatorKind::sigmoid,
                    EstimatorKind::signswish}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError(fmt::format("unknown estimator '{}' (expected fourier|ste|tanh|sigmoid|signswish)", name));
}

std::string_view to_string(TermCounting counting) {
  return counting == TermCounting::odd_bound ? "odd_bound" : "harmonics";
}

TermCounting parse_term_counting(std::string_view name) {
  if (name == "odd_bound") return TermCounting::odd_bound;
  if (name == "harmonics") return TermCounting::harmonics;
  throw ConfigError(fmt::format("unknown term counting '{}' (expected odd_bound|harmonics)", name));
}

GradientEstimator::GradientEstimator(EstimatorSpec spec) : spec_(spec) {
  spec_.validate();
  harmonics_ = spec_.harmonics();
}

double GradientEstimator::clamp_fourier(double phi) const {
  const double bound = kFourierClamp * spec_.half_period;
  return std::clamp(phi, -bound, bound);
}

double GradientEstimator::value(double phi) const {
  if (std::isnan(phi)) throw Error("surrogate evaluated at NaN");
  switch (spec_.kind) {
    case EstimatorKind::fourier: {
      const double x = clamp_fourier(phi);
      const double w = std::numbers::pi * x / spec_.half_period;
      double sum = 0.0;
      for (int i : harmonics_) sum += std::sin(i * w) / i;
      return 4.0 / std::numbers::pi * sum;
    }
    case EstimatorKind::ste:
      return std::clamp(phi, -spec_.ste_clip, spec_.ste_clip);
    case EstimatorKind::tanh:
      return std::tanh(phi / spec_.tanh_temperature);
    case EstimatorKind::sigmoid:
      return 2.0 * logistic(spec_.sigmoid_beta * phi) - 1.0;
    case EstimatorKind::signswish: {
      const double bx = spec_.signswish_beta * phi;
      const double s = logistic(bx);
      return 2.0 * s * (1.0 + bx * (1.0 - s)) - 1.0;
    }
  }
  return 0.0;
}

double GradientEstimator::derivative(double phi) const {
  switch (spec_.kind) {
    case EstimatorKind::fourier: {
      const double w = std::numbers::pi * clamp_fourier(phi) / spec_.half_period;
      double sum = 0.0;
      for (int i : harmonics_) sum += std::cos(i * w);
      return 4.0 / spec_.half_period * sum;
    }
    case EstimatorKind::ste:
      return std::abs(phi) <= spec_.ste_clip ? 1.0 : 0.0;
    case EstimatorKind::tanh: {
      const double t = std::tanh(phi / spec_.tanh_temperature);
      return (1.0 - t * t) / spec_.tanh_temperature;
    }
    case EstimatorKind::sigmoid: {
      const double s = logistic(spec_.sigmoid_beta * phi);
      return 2.0 * spec_.sigmoid_beta * s * (1.0 - s);
    }
    case EstimatorKind::signswish: {
      const double beta = spec_.signswish_beta;
      const double bx = beta * phi;
      const double s = logistic(bx);
      return 2.0 * beta * s * (1.0 - s) * (2.0 + bx * (1.0 - 2.0 * s));
    }
  }
  return 0.0;
}

void GradientEstimator::backprop(std::span<const double> upstream, std::span<const double> phi,
                                 std::span<double> out) const {
  if (upstream.size() != phi.size() || out.size() != phi.size()) {
    throw DimensionError(fmt::format("backprop shape mismatch: upstream {}, phi {}, out {}", upstream.size(),
                                     phi.size(), out.size()));
  }
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = upstream[i] * derivative(phi[i]);
}

double surrogate_value(const EstimatorSpec& spec, double phi) { return GradientEstimator(spec).value(phi); }

double surrogate_grad(const EstimatorSpec& spec, double phi) { return GradientEstimator(spec).derivative(phi); }

std::vector<double> backprop_sign(const EstimatorSpec& spec, std::span<const double> upstream,
                                  std::span<const double> phi) {
  std::vector<double> out(phi.size());
  GradientEstimator(spec).backprop(upstream, phi, out);
  return out;
}

}  // namespace bgch

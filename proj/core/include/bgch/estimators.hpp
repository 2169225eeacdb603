#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bgch {

enum class EstimatorKind { fourier, ste, tanh, sigmoid, signswish };

/// How the Fourier term count n is read. `odd_bound`: odd harmonics
/// 1, 3, ..., <= n (n = 4 and n = 3 coincide). `harmonics`: the first n odd
/// harmonics.
enum class TermCounting { odd_bound, harmonics };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::fourier;
  int terms = 4;
  double half_period = 1.0;  // H
  TermCounting counting = TermCounting::odd_bound;
  double ste_clip = 1.0;
  double tanh_temperature = 0.5;
  double sigmoid_beta = 5.0;
  double signswish_beta = 5.0;

  void validate() const;
  /// Odd harmonics summed by the Fourier estimator.
  std::vector<int> harmonics() const;

  bool operator==(const EstimatorSpec&) const = default;
};

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(std::string_view name);
std::string_view to_string(TermCounting counting);
TermCounting parse_term_counting(std::string_view name);

/// Smooth stand-in for sign(.) and its derivative. Forward training passes
/// always use strict sign; value() backs diagnostics and the smooth
/// gradient-check mode.
///
///   fourier:   (4/pi) sum_i sin(pi i phi / H) / i,  d/dphi = (4/H) sum_i cos(pi i phi / H)
///              phi is clamped to +-0.95 H before evaluation
///   ste:       clamp(phi, -clip, clip), derivative 1 inside the window
///   tanh:      tanh(phi / T)
///   sigmoid:   2 sigma(beta phi) - 1
///   signswish: 2 sigma(beta phi) (1 + beta phi (1 - sigma(beta phi))) - 1
class GradientEstimator {
 public:
  explicit GradientEstimator(EstimatorSpec spec);

  const EstimatorSpec& spec() const noexcept { return spec_; }

  double value(double phi) const;
  double derivative(double phi) const;

  /// out[i] = upstream[i] * derivative(phi[i]).
  void backprop(std::span<const double> upstream, std::span<const double> phi, std::span<double> out) const;

 private:
  double clamp_fourier(double phi) const;

  EstimatorSpec spec_;
  std::vector<int> harmonics_;
};

double surrogate_value(const EstimatorSpec& spec, double phi);
double surrogate_grad(const EstimatorSpec& spec, double phi);
std::vector<double> backprop_sign(const EstimatorSpec& spec, std::span<const double> upstream,
                                  std::span<const double> phi);

}  // namespace bgch

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bgch/rng.hpp"
#include "bgch/types.hpp"

namespace bgch {

struct DispersionConfig {
  int iterations = 1;     // K, number of power-iteration steps
  double epsilon = 0.5;   // dispersion strength; 0 disables dispersion

  /// Enforces K >= 0, K <= layers and epsilon in (0, 1) or exactly 0.
  void validate(int layers) const;
};

/// Rank-1 projection P = p p^T / ||p||^2, held implicitly through p.
class Projection {
 public:
  explicit Projection(Vector p);

  const Vector& vector() const noexcept { return p_; }
  double squared_norm() const noexcept { return norm_sq_; }
  Eigen::Index dim() const noexcept { return p_.size(); }

  /// P v.
  Vector apply(const Vector& v) const;

  /// M P for a matrix with one embedding per row: (M p) p^T / ||p||^2.
  Matrix apply_right(const Matrix& m) const;

 private:
  Vector p_;
  double norm_sq_;
};

/// p^(K) = (V^T V)^K p^(0), each step as V^T (V p). Draws p^(0) ~ N(0, I)
/// from `rng`; a vanishing result is retried with a fresh draw up to three
/// times before throwing DegenerateProjectionError.
Projection power_iterate(const Matrix& v, int iterations, Rng& rng);

/// Deterministic variant with a caller-supplied start vector (no retries).
Projection power_iterate(const Matrix& v, int iterations, const Vector& start);

/// V (I - eps P). Also the transpose map used in backpropagation, since P is
/// symmetric.
Matrix disperse(const Matrix& v, const Projection& proj, double epsilon);

struct ShrinkageOptions {
  Eigen::Index rows = 16;
  Eigen::Index cols = 8;
  int iterations = 1;
  double epsilon = 0.5;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double z = 3.0;                    // confidence multiplier for violations
  std::vector<double> singular_values;  // empty: drawn distinct and descending
};

/// Monte-Carlo estimate of the per-direction shrinkage mu_k produced by
/// dispersion on a matrix with known SVD.
struct ShrinkageReport {
  std::vector<double> sigma;
  std::vector<double> mu_hat;
  std::vector<double> stderr_mu;
  /// Standard error of the paired per-sample difference mu_{k+1} - mu_k.
  std::vector<double> diff_stderr;
  std::size_t violations = 0;
  bool repeated_sigma = false;
  /// Largest gap between the measured per-sample shrinkage and the closed
  /// form 1 - eps t_k^2 s_k^4K / sum_j t_j^2 s_j^4K.
  double closed_form_max_deviation = 0.0;

  std::string to_csv() const;
};

ShrinkageReport estimate_dispersion_shrinkage(const ShrinkageOptions& options);

}  // namespace bgch

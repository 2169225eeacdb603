#include "bgch/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bgch/logging.hpp"
#include "bgch/parallel.hpp"

namespace bgch {
namespace {

constexpr double kDegenerateNorm = 1e-12;
constexpr int kMaxRetries = 3;

Vector gaussian_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Vector iterate(const Matrix& v, int iterations, Vector p) {
  for (int k = 0; k < iterations; ++k) {
    const Vector vp = v * p;
    p.noalias() = v.transpose() * vp;
  }
  return p;
}

Matrix orthonormal_columns(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  return q;
}

}  // namespace

void DispersionConfig::validate(int layers) const {
  if (iterations < 0) throw ConfigError("dispersion iterations K must be >= 0");
  if (iterations > layers) {
    throw ConfigError(fmt::format("dispersion iterations K={} must not exceed layers L={}", iterations, layers));
  }
  if (!(epsilon == 0.0 || (epsilon > 0.0 && epsilon < 1.0))) {
    throw ConfigError(fmt::format("epsilon must lie in (0, 1) or be 0, got {}", epsilon));
  }
}

Projection::Projection(Vector p) : p_(std::move(p)), norm_sq_(p_.squaredNorm()) {
  if (!(std::sqrt(norm_sq_) > kDegenerateNorm) || !std::isfinite(norm_sq_)) {
    throw DegenerateProjectionError(fmt::format("dispersing vector norm {} is degenerate", std::sqrt(norm_sq_)));
  }
}

Vector Projection::apply(const Vector& v) const {
  if (v.size() != p_.size()) throw DimensionError("projection applied to vector of wrong length");
  return p_ * (p_.dot(v) / norm_sq_);
}

Matrix Projection::apply_right(const Matrix& m) const {
  if (m.cols() != p_.size()) {
    throw DimensionError(fmt::format("matrix has {} columns, dispersing vector has {}", m.cols(), p_.size()));
  }
  const Vector mp = m * p_;
  return (mp / norm_sq_) * p_.transpose();
}

Projection power_iterate(const Matrix& v, int iterations, const Vector& start) {
  if (v.rows() < 1 || v.cols() < 1) throw DimensionError("power iteration needs a non-empty matrix");
  if (start.size() != v.cols()) throw DimensionError("start vector length differs from embedding width");
  if (iterations < 0) throw ConfigError("power iteration count must be >= 0");
  return Projection(iterate(v, iterations, start));
}

Projection power_iterate(const Matrix& v, int iterations, Rng& rng) {
  if (v.rows() < 1 || v.cols() < 1) throw DimensionError("power iteration needs a non-empty matrix");
  if (iterations > 0 && v.isZero(0.0)) throw DegenerateProjectionError("embedding matrix is all zero");
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    Vector p = iterate(v, iterations, gaussian_vector(v.cols(), rng));
    if (p.norm() >= kDegenerateNorm && std::isfinite(p.squaredNorm())) return Projection(std::move(p));
    logger()->debug("degenerate dispersing vector on attempt {}", attempt + 1);
  }
  throw DegenerateProjectionError(
      fmt::format("dispersing vector vanished after {} retries", kMaxRetries));
}

Matrix disperse(const Matrix& v, const Projection& proj, double epsilon) {
  if (v.cols() != proj.dim()) {
    throw DimensionError(fmt::format("embedding width {} differs from dispersing vector length {}", v.cols(),
                                     proj.dim()));
  }
  if (epsilon == 0.0) return v;
  return v - epsilon * proj.apply_right(v);
}

std::string ShrinkageReport::to_csv() const {
  std::ostringstream out;
  out << "k,sigma_k,mu_hat_k,stderr_k\n";
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", k + 1, sigma[k], mu_hat[k], stderr_mu[k]);
  }
  return out.str();
}

ShrinkageReport estimate_dispersion_shrinkage(const ShrinkageOptions& options) {
  const Eigen::Index rows = options.rows;
  const Eigen::Index cols = options.cols;
  if (cols < 1 || rows < cols) throw DimensionError("shrinkage check needs rows >= cols >= 1");
  if (options.samples < 1) throw ConfigError("shrinkage check needs at least one sample");
  if (options.epsilon < 0.0 || options.epsilon >= 1.0) throw ConfigError("epsilon must lie in [0, 1)");

  Rng setup = make_stream(options.seed, "shrinkage-setup");
  std::vector<double> sigma = options.singular_values;
  if (sigma.empty()) {
    std::uniform_real_distribution<double> jitter(0.0, 0.5);
    for (Eigen::Index k = 0; k < cols; ++k) sigma.push_back(static_cast<double>(cols - k) + jitter(setup));
  }
  if (static_cast<Eigen::Index>(sigma.size()) != cols) throw DimensionError("singular value count differs from cols");
  std::sort(sigma.begin(), sigma.end(), std::greater<>());

  ShrinkageReport report;
  report.sigma = sigma;
  for (std::size_t k = 0; k + 1 < sigma.size(); ++k) {
    if (std::abs(sigma[k] - sigma[k + 1]) <= 1e-12 * sigma.front()) report.repeated_sigma = true;
  }
  if (report.repeated_sigma) logger()->warn("repeated singular values; their relative order is not asserted");

  const Matrix u1 = orthonormal_columns(rows, cols, setup);
  const Matrix u2 = orthonormal_columns(cols, cols, setup);
  Vector s(cols);
  for (Eigen::Index k = 0; k < cols; ++k) s[k] = sigma[static_cast<std::size_t>(k)];
  const Matrix v = u1 * s.asDiagonal() * u2.transpose();

  // Fixed shard count keeps the reduction order independent of --threads.
  constexpr std::size_t kShards = 16;
  struct Partial {
    Vector sum, sum_sq, diff_sum, diff_sum_sq;
    double max_dev = 0.0;
  };
  std::vector<Partial> partials(kShards);
  parallel_for(
      kShards,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t shard = begin; shard < end; ++shard) {
          Partial& acc = partials[shard];
          acc.sum = acc.sum_sq = Vector::Zero(cols);
          acc.diff_sum = acc.diff_sum_sq = Vector::Zero(std::max<Eigen::Index>(cols - 1, 0));
          Rng rng = make_stream(options.seed, "shrinkage", shard);
          const std::size_t lo = options.samples * shard / kShards;
          const std::size_t hi = options.samples * (shard + 1) / kShards;
          for (std::size_t i = lo; i < hi; ++i) {
            const Vector p0 = gaussian_vector(cols, rng);
            Vector mu(cols);
            if (options.epsilon == 0.0) {
              mu.setOnes();
            } else {
              // Measured route: run the dispersion code and read the diagonal
              // of U1^T V~ U2 relative to sigma.
              const Projection proj = power_iterate(v, options.iterations, p0);
              const Matrix dispersed = disperse(v, proj, options.epsilon);
              const Matrix core = u1.transpose() * dispersed * u2;
              for (Eigen::Index k = 0; k < cols; ++k) mu[k] = core(k, k) / s[k];
              // Closed-form route.
              const Vector t = u2.transpose() * p0;
              Vector w(cols);
              for (Eigen::Index k = 0; k < cols; ++k) w[k] = t[k] * t[k] * std::pow(s[k], 4 * options.iterations);
              const double total = w.sum();
              for (Eigen::Index k = 0; k < cols; ++k) {
                const double closed = 1.0 - options.epsilon * w[k] / total;
                acc.max_dev = std::max(acc.max_dev, std::abs(closed - mu[k]));
              }
            }
            acc.sum += mu;
            acc.sum_sq += mu.cwiseProduct(mu);
            for (Eigen::Index k = 0; k + 1 < cols; ++k) {
              const double d = mu[k + 1] - mu[k];
              acc.diff_sum[k] += d;
              acc.diff_sum_sq[k] += d * d;
            }
          }
        }
      },
      1);

  Vector sum = Vector::Zero(cols), sum_sq = Vector::Zero(cols);
  Vector diff_sum = Vector::Zero(std::max<Eigen::Index>(cols - 1, 0)), diff_sq = diff_sum;
  for (const Partial& p : partials) {
    sum += p.sum;
    sum_sq += p.sum_sq;
    diff_sum += p.diff_sum;
    diff_sq += p.diff_sum_sq;
    report.closed_form_max_deviation = std::max(report.closed_form_max_deviation, p.max_dev);
  }
  const double n = static_cast<double>(options.samples);
  auto standard_error = [n](double s1, double s2) {
    if (n < 2) return 0.0;
    const double mean = s1 / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1));
    return std::sqrt(var / n);
  };
  for (Eigen::Index k = 0; k < cols; ++k) {
    report.mu_hat.push_back(sum[k] / n);
    report.stderr_mu.push_back(standard_error(sum[k], sum_sq[k]));
  }
  for (Eigen::Index k = 0; k + 1 < cols; ++k) {
    const double se = standard_error(diff_sum[k], diff_sq[k]);
    report.diff_stderr.push_back(se);
    const auto ku = static_cast<std::size_t>(k);
    const bool tied = std::abs(sigma[ku] - sigma[ku + 1]) <= 1e-12 * sigma.front();
    if (!tied && diff_sum[k] / n < -options.z * se) ++report.violations;
  }
  return report;
}

}  // namespace bgch

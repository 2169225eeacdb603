#include "bgch/objective.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace bgch {
namespace {

constexpr double kProbFloor = 1e-7;

bool saturated(double s) { return s <= kProbFloor || s >= 1.0 - kProbFloor; }

double raw_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t distinct_x(const TrainingBatch& batch) {
  std::vector<NodeId> xs;
  xs.reserve(batch.positives.size());
  for (const Edge& e : batch.positives) xs.push_back(e.x);
  std::sort(xs.begin(), xs.end());
  return static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());
}

void check_batch(const TrainingBatch& batch) {
  if (batch.negatives.size() != batch.positives.size() * batch.per_positive) {
    throw DimensionError(fmt::format("batch has {} negatives for {} positives x {}", batch.negatives.size(),
                                     batch.positives.size(), batch.per_positive));
  }
}

}  // namespace

double clamped_sigmoid(double z) { return std::clamp(raw_sigmoid(z), kProbFloor, 1.0 - kProbFloor); }

double reconstruction_loss(const Matrix& v0, std::size_t n1, const TrainingBatch& batch, Matrix* grad) {
  check_batch(batch);
  if (batch.positives.empty()) return 0.0;
  const double inv_x = 1.0 / static_cast<double>(distinct_x(batch));
  double loss = 0.0;
  auto term = [&](NodeId x, NodeId y, bool positive) {
    const auto ix = static_cast<Eigen::Index>(x);
    const auto iy = static_cast<Eigen::Index>(n1 + y);
    const double z = v0.row(ix).dot(v0.row(iy));
    const double raw = raw_sigmoid(z);
    const double s = std::clamp(raw, kProbFloor, 1.0 - kProbFloor);
    loss -= positive ? std::log(s) : std::log(1.0 - s);
    if (grad != nullptr && !saturated(raw)) {
      const double g = (positive ? s - 1.0 : s) * inv_x;
      grad->row(ix).noalias() += g * v0.row(iy);
      grad->row(iy).noalias() += g * v0.row(ix);
    }
  };
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Edge& e = batch.positives[i];
    term(e.x, e.y, true);
    for (std::size_t j = 0; j < batch.per_positive; ++j) term(e.x, batch.negatives[i * batch.per_positive + j], false);
  }
  return loss * inv_x;
}

double bpr_loss(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  if (scores_pos.size() != scores_neg.size()) throw DimensionError("bpr needs paired scores");
  if (scores_pos.empty()) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < scores_pos.size(); ++i) loss -= std::log(clamped_sigmoid(scores_pos[i] - scores_neg[i]));
  return loss / static_cast<double>(scores_pos.size());
}

double total_loss(double rec, double bpr, const Matrix& v0, const LossWeights& weights) {
  double total = weights.lambda2 * v0.squaredNorm();
  if (weights.use_rec) total += rec;
  if (weights.use_bpr) total += weights.lambda1 * bpr;
  return total;
}

LossBreakdown evaluate_objective(const HashingEncoder& encoder, const EncoderCache& cache, const Matrix& v0,
                                 std::size_t n1, const TrainingBatch& batch, const LossWeights& weights,
                                 ObjectiveGradients* grads) {
  check_batch(batch);
  LossBreakdown out;
  if (grads != nullptr) {
    grads->embeddings = Matrix::Zero(v0.rows(), v0.cols());
    grads->scales.resize(0, 0);
  }

  out.rec = reconstruction_loss(v0, n1, batch, grads != nullptr && weights.use_rec ? &grads->embeddings : nullptr);

  const std::size_t pairs = batch.negatives.size();
  std::vector<double> pos(pairs);
  std::vector<double> neg(pairs);
  std::vector<PairGradient> pair_grads;
  if (grads != nullptr && weights.use_bpr) pair_grads.reserve(2 * pairs);
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Edge& e = batch.positives[i];
    const double sp = encoder.score(cache, e.x, n1 + e.y);
    for (std::size_t j = 0; j < batch.per_positive; ++j) {
      const std::size_t k = i * batch.per_positive + j;
      const std::size_t yn = n1 + batch.negatives[k];
      pos[k] = sp;
      neg[k] = encoder.score(cache, e.x, yn);
      if (grads != nullptr && weights.use_bpr) {
        const double raw = raw_sigmoid(pos[k] - neg[k]);
        if (saturated(raw)) continue;
        const double w = -weights.lambda1 * (1.0 - raw) / static_cast<double>(pairs);
        pair_grads.push_back({e.x, n1 + e.y, w});
        pair_grads.push_back({e.x, yn, -w});
      }
    }
  }
  out.bpr = bpr_loss(pos, neg);
  out.l2 = v0.squaredNorm();
  out.total = total_loss(out.rec, out.bpr, v0, weights);

  if (grads != nullptr) {
    if (!pair_grads.empty() || encoder.options().scale_mode == ScaleMode::learned) {
      EncoderGradients eg = encoder.backward(cache, pair_grads);
      grads->embeddings += eg.embeddings;
      grads->scales = std::move(eg.scales);
    }
    grads->embeddings += 2.0 * weights.lambda2 * v0;
    for (Eigen::Index r = 0; r < grads->embeddings.rows(); ++r) {
      if (!grads->embeddings.row(r).allFinite()) {
        throw DivergenceError(fmt::format("non-finite gradient at node {}", r));
      }
    }
  }
  if (!std::isfinite(out.total)) throw DivergenceError("loss is not finite");
  return out;
}

}  // namespace bgch

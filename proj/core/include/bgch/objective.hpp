#pragma once

#include <span>
#include <vector>

#include "bgch/graph.hpp"
#include "bgch/model.hpp"
#include "bgch/types.hpp"

namespace bgch {

/// Observed (x, y) pairs with `per_positive` sampled negatives y' each.
/// negatives[i * per_positive + j] belongs to positives[i]. Ids are local.
struct TrainingBatch {
  std::vector<Edge> positives;
  std::vector<NodeId> negatives;
  std::size_t per_positive = 1;
};

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1e-4;
  bool use_rec = true;
  bool use_bpr = true;
};

struct LossBreakdown {
  double rec = 0.0;
  double bpr = 0.0;
  double l2 = 0.0;  // ||V0||_F^2, unweighted
  double total = 0.0;
};

/// Logistic output clamped to [1e-7, 1 - 1e-7].
double clamped_sigmoid(double z);

/// Cross-entropy over raw embedding dot products, summed over the batch's
/// positives and negatives and divided by the number of distinct x.
/// When `grad` is given, adds dL/dV0 into it.
double reconstruction_loss(const Matrix& v0, std::size_t n1, const TrainingBatch& batch, Matrix* grad = nullptr);

/// Mean over pairs of -ln sigma(pos - neg).
double bpr_loss(std::span<const double> scores_pos, std::span<const double> scores_neg);

/// rec + lambda1 bpr + lambda2 ||V0||^2, with disabled terms dropped.
double total_loss(double rec, double bpr, const Matrix& v0, const LossWeights& weights);

struct ObjectiveGradients {
  Matrix embeddings;
  Matrix scales;  // learned-scale mode only
};

/// Full objective for one batch against a forward cache of `encoder`.
/// Fills `grads` (if non-null) with the exact gradient of the returned total.
LossBreakdown evaluate_objective(const HashingEncoder& encoder, const EncoderCache& cache, const Matrix& v0,
                                 std::size_t n1, const TrainingBatch& batch, const LossWeights& weights,
                                 ObjectiveGradients* grads = nullptr);

}  // namespace bgch

#pragma once

#include <string>
#include <vector>

#include "bgch/graph.hpp"
#include "bgch/objective.hpp"
#include "bgch/train_config.hpp"

namespace bgch {

enum class LandscapeVariant { hashed, non_hashed };

struct LandscapePoint {
  LandscapeVariant variant = LandscapeVariant::hashed;
  double p_i = 0.0;  // perturbation applied to x rows
  double p_j = 0.0;  // perturbation applied to y rows
  double loss = 0.0;
};

struct LandscapeGrid {
  std::vector<double> p_values;
  std::vector<LandscapePoint> points;

  /// max - min loss over one variant's grid.
  double range(LandscapeVariant variant) const;
  /// variant,p_i,p_j,loss
  std::string to_csv() const;
};

/// p_start, p_start + step, ... up to p_end (inclusive within 1e-9).
std::vector<double> landscape_range(double p_start, double p_end, double step);

/// Shifts every x row by p_i * mean|V| and every y row by p_j * mean|V|
/// (mean over the row's entries), then evaluates the objective on one fixed
/// batch and projection. The hashed variant uses sign codes and computed
/// scales; the non-hashed variant skips the sign (identity codes, unit
/// scales).
LandscapeGrid landscape_scan(const BipartiteGraph& train, const TrainConfig& cfg, const Matrix& v0,
                             const std::vector<double>& p_values);

}  // namespace bgch

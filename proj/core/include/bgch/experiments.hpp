#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bgch/estimators.hpp"
#include "bgch/graph.hpp"
#include "bgch/trainer.hpp"

namespace bgch {

struct SuiteRow {
  std::string name;
  bool failed = false;
  std::string error;
  double recall20 = 0.0;
  double ndcg20 = 0.0;
  double delta_recall_pct = 0.0;  // relative to the first row
  double delta_ndcg_pct = 0.0;
  double final_loss = 0.0;
  double iteration_ms = 0.0;
};

struct SuiteTable {
  std::vector<SuiteRow> rows;

  /// name,status,recall@20,ndcg@20,delta_recall_pct,delta_ndcg_pct,final_loss,iteration_ms
  std::string to_csv(bool with_timing = true) const;
  /// Aligned text table.
  std::string to_text(bool with_timing = true) const;
  const SuiteRow& row(const std::string& name) const;
};

/// Full model plus the six single-switch variants, same seed and budget.
/// Row names: bgch, no_fd, no_ah_ta, no_ah_rf, learnable_factors, no_bpr, no_rec.
SuiteTable run_ablation_suite(const DataSplit& split, const TrainConfig& base, const TrainOptions& options = {});

/// One run per estimator kind (base Fourier settings for fourier) and one per
/// Fourier term count in `fourier_terms`. Rows are named after the kind, and
/// fourier_n<k> for the sweep.
SuiteTable run_estimator_suite(const DataSplit& split, const TrainConfig& base, const std::vector<EstimatorKind>& kinds,
                               const std::vector<int>& fourier_terms, const TrainOptions& options = {});

/// 32 d / (d + 32 (L + 1)): float32 vector of width d against d code bits
/// plus L + 1 float32 scales.
double theoretical_space_ratio(std::size_t d, std::size_t layers);

/// 32 d / (d + 32): float32 per segment against one segment of codes plus its scale.
double segment_space_ratio(std::size_t d);

struct SpaceAudit {
  std::size_t nodes = 0;
  std::size_t d = 0;
  std::size_t layers = 0;  // L; the table holds L + 1 segments
  std::uintmax_t file_bytes = 0;
  std::size_t payload_bits_per_node = 0;  // (L + 1)(d + 32)
  double measured_bits_per_node = 0.0;    // (file - header) * 8 / nodes
  double theoretical_ratio = 0.0;
  double segment_ratio = 0.0;
  double overhead_pct = 0.0;  // file bytes over payload, in percent

  std::string to_text() const;
};

SpaceAudit space_audit(const std::filesystem::path& table_file);

}  // namespace bgch

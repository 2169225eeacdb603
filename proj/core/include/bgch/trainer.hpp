#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bgch/conv_hash.hpp"
#include "bgch/graph.hpp"
#include "bgch/metrics.hpp"
#include "bgch/model.hpp"
#include "bgch/rng.hpp"
#include "bgch/train_config.hpp"

namespace bgch {

/// Adam with bias correction, one instance per parameter tensor.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index rows, Eigen::Index cols, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Matrix& param, const Matrix& grad);

  std::uint64_t steps() const noexcept { return t_; }
  const Matrix& first_moment() const noexcept { return m_; }
  const Matrix& second_moment() const noexcept { return v_; }
  double lr() const noexcept { return lr_; }

 private:
  friend class CheckpointIO;

  double lr_ = 0.01;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::uint64_t t_ = 0;
  Matrix m_;
  Matrix v_;
};

/// Uniform y' with (x, y') unobserved, by rejection against N(x).
class NegativeSampler {
 public:
  explicit NegativeSampler(const BipartiteGraph& train);
  /// Throws Error when x is connected to every y.
  NodeId sample(NodeId x, Rng& rng) const;

 private:
  const BipartiteGraph* graph_;
};

struct TrainState {
  Matrix embeddings;            // V0, one row per global node
  Matrix learned_scales;        // (nodes x segments), learnable-factor runs only
  Adam embedding_opt;
  std::optional<Adam> scale_opt;
  int epoch = 0;
  std::uint64_t iterations = 0;
};

/// "BGCK" | u16 version | config text | state tensors, all little-endian.
void save_checkpoint(const TrainState& state, const TrainConfig& cfg, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path, TrainConfig* cfg = nullptr);

struct EpochLog {
  int epoch = 0;
  double loss_rec = 0.0;
  double loss_bpr = 0.0;
  double loss_total = 0.0;
  double recall20 = 0.0;
  double ndcg20 = 0.0;
  double wall_ms = 0.0;
};

/// epoch,loss_rec,loss_bpr,loss_total,recall@20,ndcg@20,wall_ms. wall_ms is
/// written as 0 unless `with_wall_clock`, keeping reruns byte-identical.
std::string metrics_csv(const std::vector<EpochLog>& log, bool with_wall_clock = false);

struct TrainOptions {
  bool validate_each_epoch = true;
  std::vector<std::size_t> final_cutoffs = {10, 20, 50, 100, 200, 500, 1000};
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  TrainState state;
  HashCodeTable codes;
  std::vector<EpochLog> log;
  MetricReport final_report;
  double iteration_ms = 0.0;  // mean wall time per optimizer step
  bool early_stopped = false;
};

/// Builds the sign-mode code table of `v0` over the given graph.
HashCodeTable encode(const NormalizedAdjacency& adj, const TrainConfig& cfg, const Matrix& v0,
                     const std::optional<Projection>& proj, const Matrix* learned_scales = nullptr);

TrainResult train(const DataSplit& split, const TrainConfig& cfg, const TrainOptions& options = {});

}  // namespace bgch

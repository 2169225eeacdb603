#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bgch/conv_hash.hpp"
#include "bgch/dispersion.hpp"
#include "bgch/estimators.hpp"
#include "bgch/graph.hpp"
#include "bgch/types.hpp"

namespace bgch {

/// What the encoder emits per hashed layer.
enum class CodeMode {
  sign,       // strict sign forward, estimator derivative backward (training)
  surrogate,  // estimator's smooth value forward, its exact derivative backward
  identity,   // no hashing: codes are the dispersed embeddings themselves
};

enum class ScaleMode {
  computed,  // alpha = ||row||_1 / d, differentiated through its L1 subgradient
  unit,      // alpha = 1
  learned,   // alpha read from a trainable (node x segment) matrix
};

struct EncoderOptions {
  int layers = 2;
  double epsilon = 0.5;
  bool topology_aware = true;
  ScaleMode scale_mode = ScaleMode::computed;
  CodeMode code_mode = CodeMode::sign;
};

/// Activations kept from a forward pass for the backward pass.
struct EncoderCache {
  std::optional<Projection> projection;
  LayerStack stack;
  std::vector<int> hashed_layers;  // layer index of each segment
  std::vector<Matrix> codes;       // Q per segment, rows per node
  std::vector<Vector> scales;      // alpha per segment

  std::size_t segments() const noexcept { return hashed_layers.size(); }
};

/// dL/dY for one scored (x, y) pair, both as global node indices.
struct PairGradient {
  std::size_t x = 0;
  std::size_t y = 0;
  double weight = 0.0;
};

struct EncoderGradients {
  Matrix embeddings;
  Matrix scales;  // populated only for ScaleMode::learned
};

/// Dispersion, layer-wise convolution and hashing of the node embeddings,
/// plus the exact reverse pass through all of them.
class HashingEncoder {
 public:
  HashingEncoder(const NormalizedAdjacency& adj, EncoderOptions options, EstimatorSpec estimator);

  const EncoderOptions& options() const noexcept { return options_; }
  const GradientEstimator& estimator() const noexcept { return estimator_; }
  std::size_t segments() const noexcept;

  /// `learned_scales` (nodes x segments) is required for ScaleMode::learned.
  EncoderCache forward(const Matrix& v0, const std::optional<Projection>& proj,
                       const Matrix* learned_scales = nullptr) const;

  /// sum_s alpha_x alpha_y (Q_x . Q_y) over segments.
  double score(const EncoderCache& cache, std::size_t x, std::size_t y) const;

  /// Gradients w.r.t. the embeddings (and learned scales). The dispersing
  /// vector is held constant.
  EncoderGradients backward(const EncoderCache& cache, std::span<const PairGradient> pairs) const;

  /// Packs a sign-mode cache into a code table. Negative learned scales are
  /// stored as |alpha| with the segment's bits flipped, which leaves every
  /// score unchanged.
  HashCodeTable to_table(const EncoderCache& cache) const;

 private:
  const NormalizedAdjacency* adj_;
  EncoderOptions options_;
  GradientEstimator estimator_;
};

}  // namespace bgch

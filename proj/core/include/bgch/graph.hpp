#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bgch/types.hpp"

namespace bgch {

/// An interaction between x (first node set) and y (second node set).
struct Edge {
  NodeId x = 0;
  NodeId y = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Bipartite graph over n1 + n2 nodes.
///
/// Nodes share one global index space: x keeps index x, y maps to n1 + y.
/// Adjacency is kept in CSR form over the global space and is symmetric and
/// block-antidiagonal by construction. Immutable after construction.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  /// Builds a graph from raw pairs. Duplicates collapse to one edge.
  /// Throws DimensionError on out-of-range ids.
  static BipartiteGraph from_edges(std::size_t n1, std::size_t n2, std::vector<Edge> edges);

  std::size_t n1() const noexcept { return n1_; }
  std::size_t n2() const noexcept { return n2_; }
  std::size_t num_nodes() const noexcept { return n1_ + n2_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  /// Sorted by (x, y).
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::size_t global_y(NodeId y) const noexcept { return n1_ + y; }

  std::size_t degree(std::size_t global) const noexcept {
    return offsets_[global + 1] - offsets_[global];
  }

  /// Neighbours of a global node, as global indices, ascending.
  std::span<const std::uint32_t> neighbors(std::size_t global) const noexcept {
    return {targets_.data() + offsets_[global], degree(global)};
  }

  /// y-side neighbours of x, as local y ids, ascending.
  std::vector<NodeId> items_of(NodeId x) const;

  bool has_edge(NodeId x, NodeId y) const noexcept;

  std::size_t isolated_count() const noexcept;

  /// |E| / (n1 * n2); the fraction of possible interactions observed.
  double density() const noexcept;

  const std::vector<std::size_t>& row_offsets() const noexcept { return offsets_; }
  const std::vector<std::uint32_t>& column_indices() const noexcept { return targets_; }

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
    return a.n1_ == b.n1_ && a.n2_ == b.n2_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> targets_;
};

enum class EdgeFormat { automatic, tsv, csv };

/// Result of ingesting a text edge list: the densified graph plus the
/// original ids for each dense index.
struct LoadedGraph {
  BipartiteGraph graph;
  std::vector<std::uint64_t> x_ids;
  std::vector<std::uint64_t> y_ids;
};

/// Reads "x-id<sep>y-id" lines. '#' lines and blank lines are skipped.
/// Throws ParseError (with line number) or EmptyGraphError.
LoadedGraph load_edge_list(const std::filesystem::path& path, EdgeFormat format = EdgeFormat::automatic);

/// Writes dense ids as tab-separated text.
void save_edge_list(const BipartiteGraph& g, const std::filesystem::path& path);

/// Binary graph cache: "BGRF", u16 version, u64 n1, n2, |E|, then u32 pairs.
void save_graph_cache(const BipartiteGraph& g, const std::filesystem::path& path);
BipartiteGraph load_graph_cache(const std::filesystem::path& path);

/// D^-1/2 A D^-1/2 in CSR form over the global node space.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  std::size_t isolated_count() const noexcept { return isolated_; }

  std::span<const std::uint32_t> row_columns(std::size_t r) const noexcept {
    return {columns_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }

  /// Value at (r, c), 0 when absent.
  double at(std::size_t r, std::size_t c) const noexcept;

  /// out = this * in. Rows of `in` are node embeddings.
  Matrix multiply(const Matrix& in) const;
  void multiply_into(const Matrix& in, Matrix& out) const;

  Matrix to_dense() const;

 private:
  friend NormalizedAdjacency normalize(const BipartiteGraph& g);

  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> columns_;
  std::vector<double> values_;
  std::size_t isolated_ = 0;
};

/// Symmetric normalization; isolated nodes keep empty rows and are counted.
NormalizedAdjacency normalize(const BipartiteGraph& g);

/// Train/test partition of the edge set.
struct DataSplit {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<Edge> train;
  std::vector<Edge> test;
  double test_ratio = 0.0;
  std::uint64_t seed = 0;

  BipartiteGraph train_graph() const;
  /// Held-out y ids per x (empty for x without test edges).
  std::vector<std::vector<NodeId>> held_out() const;
};

/// Per-x stratified split: each x gets floor(deg * ratio) test edges, the
/// remainder of round(|E| * ratio) is spread by largest fractional part, and
/// every x keeps at least one training edge. Deterministic given the seed.
DataSplit split(const BipartiteGraph& g, double test_ratio, std::uint64_t seed);

/// Synthetic graph with `clusters` planted blocks: x and y in the same block
/// connect with probability p_in, otherwise with p_out. Node i of either side
/// belongs to block i * clusters / n.
BipartiteGraph planted_partition(std::size_t n1, std::size_t n2, std::size_t clusters, double p_in,
                                 double p_out, std::uint64_t seed);

}  // namespace bgch

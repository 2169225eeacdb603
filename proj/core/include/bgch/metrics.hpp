#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgch/conv_hash.hpp"
#include "bgch/graph.hpp"

namespace bgch {

/// |top-n ∩ relevant| / |relevant|; nullopt when `relevant` is empty.
std::optional<double> recall_at(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                                std::size_t n);

/// Binary-gain DCG@n with log2(rank + 1) discount over the ideal DCG.
std::optional<double> ndcg_at(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                              std::size_t n);

struct QueryMetrics {
  NodeId x = 0;
  std::vector<double> recall;  // one per cutoff
  std::vector<double> ndcg;
};

struct MetricReport {
  std::vector<std::size_t> cutoffs;
  std::vector<double> recall;  // mean over queries with >= 1 held-out positive
  std::vector<double> ndcg;
  std::size_t queries = 0;
  std::string fingerprint;
  std::vector<QueryMetrics> per_query;

  /// Aggregate at cutoff n; throws if n was not evaluated.
  double recall_at_cutoff(std::size_t n) const;
  double ndcg_at_cutoff(std::size_t n) const;

  std::string to_csv() const;
};

inline const std::vector<std::size_t>& default_cutoffs() {
  static const std::vector<std::size_t> c = {20, 50, 100, 200, 500, 1000};
  return c;
}

/// Ranks every y for each x with held-out positives through the Hamming
/// index, excluding the x's training items. Table rows follow the global
/// node layout (x first, then y).
MetricReport evaluate_codes(const HashCodeTable& table, const BipartiteGraph& train,
                            const std::vector<std::vector<NodeId>>& held_out, std::vector<std::size_t> cutoffs);

}  // namespace bgch

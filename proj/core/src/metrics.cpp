#include "bgch/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bgch/parallel.hpp"
#include "bgch/retrieval.hpp"

namespace bgch {
namespace {

std::vector<std::uint32_t> sorted_copy(std::span<const std::uint32_t> ids) {
  std::vector<std::uint32_t> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool contains(const std::vector<std::uint32_t>& sorted, std::uint32_t id) {
  return std::binary_search(sorted.begin(), sorted.end(), id);
}

std::size_t cutoff_index(const std::vector<std::size_t>& cutoffs, std::size_t n) {
  const auto it = std::find(cutoffs.begin(), cutoffs.end(), n);
  if (it == cutoffs.end()) throw Error(fmt::format("cutoff {} was not evaluated", n));
  return static_cast<std::size_t>(it - cutoffs.begin());
}

}  // namespace

std::optional<double> recall_at(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                                std::size_t n) {
  const auto rel = sorted_copy(relevant);
  if (rel.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) hits += contains(rel, ranked[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

std::optional<double> ndcg_at(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                              std::size_t n) {
  const auto rel = sorted_copy(relevant);
  if (rel.empty()) return std::nullopt;
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) {
    if (contains(rel, ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(n, rel.size()); ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

double MetricReport::recall_at_cutoff(std::size_t n) const { return recall[cutoff_index(cutoffs, n)]; }
double MetricReport::ndcg_at_cutoff(std::size_t n) const { return ndcg[cutoff_index(cutoffs, n)]; }

std::string MetricReport::to_csv() const {
  std::string out = "cutoff,recall,ndcg,queries\n";
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    out += fmt::format("{},{:.6f},{:.6f},{}\n", cutoffs[i], recall[i], ndcg[i], queries);
  }
  return out;
}

MetricReport evaluate_codes(const HashCodeTable& table, const BipartiteGraph& train,
                            const std::vector<std::vector<NodeId>>& held_out, std::vector<std::size_t> cutoffs) {
  if (table.nodes() != train.num_nodes()) throw DimensionError("code table and graph node counts differ");
  if (cutoffs.empty()) throw Error("no cutoffs requested");
  MetricReport report;
  report.cutoffs = std::move(cutoffs);
  const std::size_t max_n = *std::max_element(report.cutoffs.begin(), report.cutoffs.end());

  std::vector<NodeId> queries;
  for (std::size_t x = 0; x < held_out.size() && x < train.n1(); ++x) {
    if (!held_out[x].empty()) queries.push_back(static_cast<NodeId>(x));
  }

  const RetrievalIndex index(table, train.n1(), train.n2());
  report.per_query.resize(queries.size());
  parallel_for(queries.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores(index.size());
    for (std::size_t qi = begin; qi < end; ++qi) {
      const NodeId x = queries[qi];
      const auto exclude = train.items_of(x);
      index.score_all(query_from_table(table, x), scores);
      const TopNResult top = select_topn(scores, max_n, exclude);
      std::vector<std::uint32_t> ranked(top.size());
      for (std::size_t i = 0; i < top.size(); ++i) ranked[i] = top[i].id;
      QueryMetrics& m = report.per_query[qi];
      m.x = x;
      for (std::size_t n : report.cutoffs) {
        m.recall.push_back(*recall_at(ranked, held_out[x], n));
        m.ndcg.push_back(*ndcg_at(ranked, held_out[x], n));
      }
    }
  }, 16);

  report.queries = queries.size();
  report.recall.assign(report.cutoffs.size(), 0.0);
  report.ndcg.assign(report.cutoffs.size(), 0.0);
  for (const QueryMetrics& m : report.per_query) {
    for (std::size_t i = 0; i < report.cutoffs.size(); ++i) {
      report.recall[i] += m.recall[i];
      report.ndcg[i] += m.ndcg[i];
    }
  }
  if (report.queries > 0) {
    for (std::size_t i = 0; i < report.cutoffs.size(); ++i) {
      report.recall[i] /= static_cast<double>(report.queries);
      report.ndcg[i] /= static_cast<double>(report.queries);
    }
  }
  return report;
}

}  // namespace bgch

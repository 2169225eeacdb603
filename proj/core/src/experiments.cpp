#include "bgch/experiments.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bgch/logging.hpp"
#include <spdlog/spdlog.h>

namespace bgch {
namespace {

SuiteRow run_row(const std::string& name, const DataSplit& split, const TrainConfig& cfg,
                 const TrainOptions& options) {
  SuiteRow row;
  row.name = name;
  try {
    const TrainResult result = train(split, cfg, options);
    if (result.final_report.queries > 0) {
      row.recall20 = result.final_report.recall_at_cutoff(20);
      row.ndcg20 = result.final_report.ndcg_at_cutoff(20);
    }
    row.final_loss = result.log.empty() ? 0.0 : result.log.back().loss_total;
    row.iteration_ms = result.iteration_ms;
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
    logger()->warn("variant {} failed: {}", name, e.what());
  }
  return row;
}

double pct(double value, double base) { return base != 0.0 ? (value - base) / base * 100.0 : 0.0; }

void fill_deltas(SuiteTable& table) {
  if (table.rows.empty()) return;
  const SuiteRow& ref = table.rows.front();
  for (SuiteRow& r : table.rows) {
    if (r.failed || ref.failed) continue;
    r.delta_recall_pct = pct(r.recall20, ref.recall20);
    r.delta_ndcg_pct = pct(r.ndcg20, ref.ndcg20);
  }
}

}  // namespace

std::string SuiteTable::to_csv(bool with_timing) const {
  std::string out = "name,status,recall@20,ndcg@20,delta_recall_pct,delta_ndcg_pct,final_loss,iteration_ms\n";
  for (const SuiteRow& r : rows) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.2f},{:.2f},{:.6f},{:.3f}\n", r.name, r.failed ? "failed" : "ok",
                       r.recall20, r.ndcg20, r.delta_recall_pct, r.delta_ndcg_pct, r.final_loss,
                       with_timing ? r.iteration_ms : 0.0);
  }
  return out;
}

std::string SuiteTable::to_text(bool with_timing) const {
  std::string out = fmt::format("{:<20} {:>10} {:>9} {:>10} {:>9} {:>12}\n", "variant", "Recall@20", "delta", "NDCG@20",
                                "delta", with_timing ? "ms/iter" : "");
  for (const SuiteRow& r : rows) {
    if (r.failed) {
      out += fmt::format("{:<20} failed: {}\n", r.name, r.error);
      continue;
    }
    out += fmt::format("{:<20} {:>10.4f} {:>8.2f}% {:>10.4f} {:>8.2f}%", r.name, r.recall20, r.delta_recall_pct,
                       r.ndcg20, r.delta_ndcg_pct);
    out += with_timing ? fmt::format(" {:>12.3f}\n", r.iteration_ms) : "\n";
  }
  return out;
}

const SuiteRow& SuiteTable::row(const std::string& name) const {
  const auto it = std::find_if(rows.begin(), rows.end(), [&](const SuiteRow& r) { return r.name == name; });
  if (it == rows.end()) throw Error("no suite row named " + name);
  return *it;
}

SuiteTable run_ablation_suite(const DataSplit& split, const TrainConfig& base, const TrainOptions& options) {
  SuiteTable table;
  TrainConfig full = base;
  full.ablations = {};
  table.rows.push_back(run_row("bgch", split, full, options));
  for (std::string_view name : ablation_names()) {
    TrainConfig cfg = full;
    set_ablation(cfg.ablations, name);
    table.rows.push_back(run_row(std::string(name), split, cfg, options));
  }
  fill_deltas(table);
  return table;
}

SuiteTable run_estimator_suite(const DataSplit& split, const TrainConfig& base, const std::vector<EstimatorKind>& kinds,
                               const std::vector<int>& fourier_terms, const TrainOptions& options) {
  SuiteTable table;
  for (EstimatorKind kind : kinds) {
    TrainConfig cfg = base;
    cfg.estimator.kind = kind;
    table.rows.push_back(run_row(std::string(to_string(kind)), split, cfg, options));
  }
  for (int n : fourier_terms) {
    TrainConfig cfg = base;
    cfg.estimator.kind = EstimatorKind::fourier;
    cfg.estimator.terms = n;
    table.rows.push_back(run_row(fmt::format("fourier_n{}", n), split, cfg, options));
  }
  fill_deltas(table);
  return table;
}

double theoretical_space_ratio(std::size_t d, std::size_t layers) {
  return 32.0 * static_cast<double>(d) / (static_cast<double>(d) + 32.0 * static_cast<double>(layers + 1));
}

double segment_space_ratio(std::size_t d) {
  return 32.0 * static_cast<double>(d) / (static_cast<double>(d) + 32.0);
}

std::string SpaceAudit::to_text() const {
  return fmt::format(
      "nodes                    {}\n"
      "d                        {}\n"
      "L                        {}\n"
      "file_bytes               {}\n"
      "payload_bits_per_node    {}\n"
      "measured_bits_per_node   {:.3f}\n"
      "theoretical_ratio        {:.4f}\n"
      "segment_ratio            {:.4f}\n"
      "file_overhead_pct        {:.3f}\n",
      nodes, d, layers, file_bytes, payload_bits_per_node, measured_bits_per_node, theoretical_ratio, segment_ratio,
      overhead_pct);
}

SpaceAudit space_audit(const std::filesystem::path& table_file) {
  const HashCodeTable table = HashCodeTable::load(table_file);
  SpaceAudit audit;
  audit.nodes = table.nodes();
  audit.d = table.bits();
  audit.layers = table.segments() - 1;
  audit.file_bytes = std::filesystem::file_size(table_file);
  audit.payload_bits_per_node = table.payload_bits_per_node();
  if (audit.nodes > 0) {
    audit.measured_bits_per_node =
        static_cast<double>(audit.file_bytes - HashCodeTable::kHeaderBytes) * 8.0 / static_cast<double>(audit.nodes);
    const double payload = static_cast<double>(audit.payload_bits_per_node) * static_cast<double>(audit.nodes);
    audit.overhead_pct = (static_cast<double>(audit.file_bytes) * 8.0 - payload) / payload * 100.0;
  }
  audit.theoretical_ratio = theoretical_space_ratio(audit.d, audit.layers);
  audit.segment_ratio = segment_space_ratio(audit.d);
  return audit;
}

}  // namespace bgch

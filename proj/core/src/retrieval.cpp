#include "bgch/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>

#include <fmt/format.h>

namespace bgch {
namespace {

volatile double g_sink = 0.0;

struct WorseFirst {
  bool operator()(const ScoredId& a, const ScoredId& b) const {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  }
};

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::size_t hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::size_t bits) {
  const std::size_t words = words_for_bits(bits);
  if (a.size() != words || b.size() != words) {
    throw DimensionError(fmt::format("code widths differ: {} and {} words for {} bits", a.size(), b.size(), bits));
  }
  std::size_t h = 0;
  for (std::size_t w = 0; w < words; ++w) h += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
  return h;
}

QueryCode query_from_table(const HashCodeTable& table, std::size_t node) {
  QueryCode q;
  q.words.reserve(table.segments() * table.words_per_segment());
  for (std::size_t s = 0; s < table.segments(); ++s) {
    const auto c = table.codes(node, s);
    q.words.insert(q.words.end(), c.begin(), c.end());
  }
  const auto sc = table.scales(node);
  q.scales.assign(sc.begin(), sc.end());
  return q;
}

RetrievalIndex::RetrievalIndex(const HashCodeTable& table, std::size_t first, std::size_t count)
    : count_(count),
      bits_(table.bits()),
      segments_(table.segments()),
      words_(table.words_per_segment()),
      banks_(segments_),
      scales_(segments_) {
  if (first + count > table.nodes()) throw DimensionError("candidate range exceeds the code table");
  for (std::size_t s = 0; s < segments_; ++s) {
    banks_[s].reserve(count * words_);
    scales_[s].reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
      const auto codes = table.codes(first + c, s);
      banks_[s].insert(banks_[s].end(), codes.begin(), codes.end());
      scales_[s].push_back(table.scale(first + c, s));
    }
  }
}

void RetrievalIndex::check_query(const QueryCode& q) const {
  if (q.scales.size() != segments_ || q.words.size() != segments_ * words_) {
    throw DimensionError(fmt::format("query has {} segments / {} words; index expects {} / {}", q.scales.size(),
                                     q.words.size(), segments_, segments_ * words_));
  }
}

double RetrievalIndex::score(const QueryCode& q, std::size_t candidate) const {
  check_query(q);
  if (candidate >= count_) throw DimensionError("candidate out of range");
  double total = 0.0;
  for (std::size_t s = 0; s < segments_; ++s) {
    const std::size_t h = hamming_distance({q.words.data() + s * words_, words_}, codes(candidate, s), bits_);
    const double ab = static_cast<double>(q.scales[s]) * static_cast<double>(scales_[s][candidate]);
    total += ab * static_cast<double>(static_cast<std::int64_t>(bits_) - 2 * static_cast<std::int64_t>(h));
  }
  return total;
}

void RetrievalIndex::score_all(const QueryCode& q, std::span<double> out) const {
  check_query(q);
  if (out.size() != count_) throw DimensionError("score buffer size differs from candidate count");
  std::fill(out.begin(), out.end(), 0.0);
  const auto d = static_cast<std::int64_t>(bits_);
  for (std::size_t s = 0; s < segments_; ++s) {
    const std::uint64_t* qw = q.words.data() + s * words_;
    const std::uint64_t* bank = banks_[s].data();
    const float* sc = scales_[s].data();
    const double qa = q.scales[s];
    if (words_ == 4) {
      for (std::size_t c = 0; c < count_; ++c, bank += 4) {
        const int h = std::popcount(qw[0] ^ bank[0]) + std::popcount(qw[1] ^ bank[1]) +
                      std::popcount(qw[2] ^ bank[2]) + std::popcount(qw[3] ^ bank[3]);
        out[c] += (qa * static_cast<double>(sc[c])) * static_cast<double>(d - 2 * h);
      }
    } else {
      for (std::size_t c = 0; c < count_; ++c, bank += words_) {
        std::int64_t h = 0;
        for (std::size_t w = 0; w < words_; ++w) h += std::popcount(qw[w] ^ bank[w]);
        out[c] += (qa * static_cast<double>(sc[c])) * static_cast<double>(d - 2 * h);
      }
    }
  }
}

TopNResult RetrievalIndex::topn(const QueryCode& q, std::size_t n, std::span<const std::uint32_t> exclude) const {
  std::vector<double> scores(count_);
  score_all(q, scores);
  return select_topn(scores, n, exclude);
}

TopNResult select_topn(std::span<const double> scores, std::size_t n, std::span<const std::uint32_t> exclude) {
  if (n == 0) throw DimensionError("top-N needs N >= 1");
  std::priority_queue<ScoredId, std::vector<ScoredId>, WorseFirst> heap;
  auto skip = exclude.begin();
  for (std::size_t c = 0; c < scores.size(); ++c) {
    while (skip != exclude.end() && *skip < c) ++skip;
    if (skip != exclude.end() && *skip == c) continue;
    const ScoredId item{static_cast<std::uint32_t>(c), scores[c]};
    if (heap.size() < n) {
      heap.push(item);
    } else if (WorseFirst{}(item, heap.top())) {
      heap.pop();
      heap.push(item);
    }
  }
  TopNResult out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

FloatIndex::FloatIndex(const RetrievalIndex& index)
    : count_(index.size()), bits_(index.bits()), segments_(index.segments()), banks_(segments_), scales_(segments_) {
  for (std::size_t s = 0; s < segments_; ++s) {
    banks_[s].resize(count_ * bits_);
    scales_[s].resize(count_);
    for (std::size_t c = 0; c < count_; ++c) {
      const auto codes = unpack_codes(index.codes(c, s), bits_);
      for (std::size_t b = 0; b < bits_; ++b) banks_[s][c * bits_ + b] = static_cast<float>(codes[b]);
      scales_[s][c] = index.scale(c, s);
    }
  }
}

void FloatIndex::score_all(const QueryCode& q, std::span<double> out) const {
  if (q.scales.size() != segments_) throw DimensionError("query segment count differs from index");
  if (out.size() != count_) throw DimensionError("score buffer size differs from candidate count");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t words = words_for_bits(bits_);
  std::vector<float> qf(bits_);
  for (std::size_t s = 0; s < segments_; ++s) {
    const auto codes = unpack_codes({q.words.data() + s * words, words}, bits_);
    for (std::size_t b = 0; b < bits_; ++b) qf[b] = static_cast<float>(codes[b]);
    const float* bank = banks_[s].data();
    const float* sc = scales_[s].data();
    const double qa = q.scales[s];
    for (std::size_t c = 0; c < count_; ++c, bank += bits_) {
      // Integer-valued partial sums, so the result is exact in float.
      float acc[8] = {};
      std::size_t b = 0;
      for (; b + 8 <= bits_; b += 8) {
        for (int k = 0; k < 8; ++k) acc[k] += qf[b + k] * bank[b + k];
      }
      for (; b < bits_; ++b) acc[0] += qf[b] * bank[b];
      const float dot = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
      out[c] += (qa * static_cast<double>(sc[c])) * static_cast<double>(dot);
    }
  }
}

TopNResult FloatIndex::topn(const QueryCode& q, std::size_t n, std::span<const std::uint32_t> exclude) const {
  std::vector<double> scores(count_);
  score_all(q, scores);
  return select_topn(scores, n, exclude);
}

BenchReport bench_matching(const RetrievalIndex& index, const FloatIndex& floats, std::span<const QueryCode> queries,
                           std::size_t topn) {
  using Clock = std::chrono::steady_clock;
  BenchReport report;
  report.queries = queries.size();
  report.candidates = index.size();
  report.bits = index.bits();
  report.segments = index.segments();

  std::vector<double> hs(index.size());
  std::vector<double> fs(index.size());
  report.rankings_identical = true;
  for (const QueryCode& q : queries) {
    index.score_all(q, hs);
    floats.score_all(q, fs);
    for (std::size_t c = 0; c < hs.size(); ++c) report.score_mismatches += hs[c] != fs[c] ? 1 : 0;
    if (select_topn(hs, topn) != select_topn(fs, topn)) report.rankings_identical = false;
  }
  if (report.score_mismatches != 0) report.rankings_identical = false;

  std::vector<double> ht;
  std::vector<double> ft;
  ht.reserve(queries.size());
  ft.reserve(queries.size());
  double sink = 0.0;
  for (const QueryCode& q : queries) {
    const auto t0 = Clock::now();
    index.score_all(q, hs);
    const auto t1 = Clock::now();
    floats.score_all(q, fs);
    const auto t2 = Clock::now();
    sink += hs.empty() ? 0.0 : hs[0] + fs[0];
    ht.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    ft.push_back(std::chrono::duration<double, std::micro>(t2 - t1).count());
  }
  g_sink = sink;

  report.hamming_mean_us = mean(ht);
  report.hamming_p99_us = percentile(ht, 0.99);
  report.float_mean_us = mean(ft);
  report.float_p99_us = percentile(ft, 0.99);
  report.speedup = report.hamming_mean_us > 0.0 ? report.float_mean_us / report.hamming_mean_us : 0.0;
  return report;
}

std::string BenchReport::to_json() const {
  return fmt::format(
      "{{\"queries\": {}, \"candidates\": {}, \"d\": {}, \"segments\": {}, \"rankings_identical\": {}, "
      "\"score_mismatches\": {}, \"hamming_mean_us\": {:.3f}, \"hamming_p99_us\": {:.3f}, \"float_mean_us\": {:.3f}, "
      "\"float_p99_us\": {:.3f}, \"speedup\": {:.3f}}}",
      queries, candidates, bits, segments, rankings_identical ? "true" : "false", score_mismatches, hamming_mean_us,
      hamming_p99_us, float_mean_us, float_p99_us, speedup);
}

HashCodeTable random_code_table(std::size_t nodes, std::size_t bits, std::size_t segments, Rng& rng, float scale_lo,
                                float scale_hi) {
  HashCodeTable table(nodes, bits, segments);
  std::uniform_real_distribution<float> scale(scale_lo, scale_hi);
  std::vector<std::int8_t> codes(bits);
  for (std::size_t node = 0; node < nodes; ++node) {
    for (std::size_t s = 0; s < segments; ++s) {
      std::uint64_t word = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (b % 64 == 0) word = rng();
        codes[b] = (word >> (b % 64)) & 1U ? 1 : -1;
      }
      table.set_segment_codes(node, s, codes, scale(rng));
    }
  }
  return table;
}

namespace {

// Neumaier-compensated sum.
double compensated_dot(const Vector& a, const Vector& b) {
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i];
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

bool within_one_ulp(double a, double b) {
  if (a == b) return true;
  return std::nextafter(a, b) == b;
}

}  // namespace

IdentityCheckReport check_hamming_identity(std::size_t trials, std::uint64_t seed) {
  constexpr std::size_t kWidths[] = {8, 64, 256};
  IdentityCheckReport report;
  Rng rng = make_stream(seed, "hamming_identity");
  std::uniform_int_distribution<std::size_t> pick_d(0, 2);
  std::uniform_int_distribution<std::size_t> pick_l(0, 2);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t d = kWidths[pick_d(rng)];
    const std::size_t segments = pick_l(rng) + 1;
    const HashCodeTable table = random_code_table(2, d, segments, rng, 0.0F, 4.0F);
    double total = 0.0;
    for (std::size_t s = 0; s < segments; ++s) {
      const std::size_t h = hamming_distance(table.codes(0, s), table.codes(1, s), d);
      const double term = (static_cast<double>(table.scale(0, s)) * static_cast<double>(table.scale(1, s))) *
                          static_cast<double>(static_cast<std::int64_t>(d) - 2 * static_cast<std::int64_t>(h));
      total += term;
      const double oracle = compensated_dot(table.dequantize(0, s), table.dequantize(1, s));
      if (!within_one_ulp(term, oracle)) {
        if (report.violations == 0) {
          report.first_violation = fmt::format("trial {} d={} L={} layer {}: hamming {} vs float {}", t, d,
                                               segments - 1, s, term, oracle);
        }
        ++report.violations;
      }
    }
    const double indexed = RetrievalIndex(table, 1, 1).score(query_from_table(table, 0), 0);
    if (indexed != total) {
      if (report.violations == 0) {
        report.first_violation = fmt::format("trial {}: index score {} differs from per-layer sum {}", t, indexed, total);
      }
      ++report.violations;
    }
    ++report.trials;
  }
  return report;
}

void write_topn_tsv(std::ostream& out, std::uint64_t query_id, const TopNResult& result) {
  for (std::size_t r = 0; r < result.size(); ++r) {
    out << fmt::format("{}\t{}\t{}\t{}\n", query_id, r + 1, result[r].id, result[r].score);
  }
}

}  // namespace bgch

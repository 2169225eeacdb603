#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bgch/conv_hash.hpp"
#include "bgch/rng.hpp"

namespace bgch {

/// Disagreeing bits between two packed segments of `bits` width.
/// Throws DimensionError when the word counts differ from ceil(bits / 64).
std::size_t hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::size_t bits);

/// A query's codes (segment-major, ceil(d/64) words each) and scales.
struct QueryCode {
  std::vector<std::uint64_t> words;
  std::vector<float> scales;
};

QueryCode query_from_table(const HashCodeTable& table, std::size_t node);

struct ScoredId {
  std::uint32_t id = 0;
  double score = 0.0;
  bool operator==(const ScoredId&) const = default;
};

/// Descending score, ties by ascending id.
using TopNResult = std::vector<ScoredId>;

/// Candidate codes laid out as one contiguous bank per segment.
class RetrievalIndex {
 public:
  RetrievalIndex() = default;
  /// Candidates are table rows [first, first + count); candidate ids are
  /// local, 0 .. count - 1.
  RetrievalIndex(const HashCodeTable& table, std::size_t first, std::size_t count);
  explicit RetrievalIndex(const HashCodeTable& table) : RetrievalIndex(table, 0, table.nodes()) {}

  std::size_t size() const noexcept { return count_; }
  std::size_t bits() const noexcept { return bits_; }
  std::size_t segments() const noexcept { return segments_; }
  std::size_t words() const noexcept { return words_; }

  std::span<const std::uint64_t> codes(std::size_t candidate, std::size_t segment) const {
    return {banks_[segment].data() + candidate * words_, words_};
  }
  float scale(std::size_t candidate, std::size_t segment) const { return scales_[segment][candidate]; }

  /// sum_l alpha_x alpha_y (d - 2 D_H), accumulated in double.
  double score(const QueryCode& q, std::size_t candidate) const;
  void score_all(const QueryCode& q, std::span<double> out) const;

  /// Full scan with a bounded heap. `exclude` must be sorted ascending.
  TopNResult topn(const QueryCode& q, std::size_t n, std::span<const std::uint32_t> exclude = {}) const;

 private:
  void check_query(const QueryCode& q) const;

  std::size_t count_ = 0;
  std::size_t bits_ = 0;
  std::size_t segments_ = 0;
  std::size_t words_ = 0;
  std::vector<std::vector<std::uint64_t>> banks_;
  std::vector<std::vector<float>> scales_;
};

/// Same candidates with codes stored as +-1 float32 for a float dot-product
/// scan. Scores are bitwise equal to the Hamming path.
class FloatIndex {
 public:
  explicit FloatIndex(const RetrievalIndex& index);

  std::size_t size() const noexcept { return count_; }
  void score_all(const QueryCode& q, std::span<double> out) const;
  TopNResult topn(const QueryCode& q, std::size_t n, std::span<const std::uint32_t> exclude = {}) const;

 private:
  std::size_t count_ = 0;
  std::size_t bits_ = 0;
  std::size_t segments_ = 0;
  std::vector<std::vector<float>> banks_;
  std::vector<std::vector<float>> scales_;
};

/// Selects the best n of `scores` (ids are positions) skipping `exclude`.
TopNResult select_topn(std::span<const double> scores, std::size_t n, std::span<const std::uint32_t> exclude = {});

struct BenchReport {
  std::size_t queries = 0;
  std::size_t candidates = 0;
  std::size_t bits = 0;
  std::size_t segments = 0;
  bool rankings_identical = false;
  std::size_t score_mismatches = 0;
  double hamming_mean_us = 0.0;
  double hamming_p99_us = 0.0;
  double float_mean_us = 0.0;
  double float_p99_us = 0.0;
  double speedup = 0.0;  // float mean / hamming mean

  std::string to_json() const;
};

/// Asserts identical scores and Top-n rankings over all queries, then times
/// the full-candidate scan of each path single-threaded.
BenchReport bench_matching(const RetrievalIndex& index, const FloatIndex& floats, std::span<const QueryCode> queries,
                           std::size_t topn = 20);

/// Uniform random codes with scales drawn from U(scale_lo, scale_hi).
HashCodeTable random_code_table(std::size_t nodes, std::size_t bits, std::size_t segments, Rng& rng,
                                float scale_lo = 0.0F, float scale_hi = 1.0F);

struct IdentityCheckReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::string first_violation;
};

/// Random code/scale pairs (d in {8, 64, 256}, L in {0, 1, 2}): each layer's
/// Hamming-form term alpha_x alpha_y (d - 2 D_H) must lie within 1 ULP of the
/// compensated dot product of the dequantized segments.
IdentityCheckReport check_hamming_identity(std::size_t trials, std::uint64_t seed);

/// query_id, rank, candidate_id, score.
void write_topn_tsv(std::ostream& out, std::uint64_t query_id, const TopNResult& result);

}  // namespace bgch

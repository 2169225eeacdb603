#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bgch/dispersion.hpp"
#include "bgch/graph.hpp"
#include "bgch/types.hpp"

namespace bgch {

/// Dispersed layer outputs V~(0) .. V~(L).
struct LayerStack {
  std::vector<Matrix> layers;

  int depth() const noexcept { return static_cast<int>(layers.size()) - 1; }
};

/// layers[0] = V0 (I - eps P) (or V0 when no projection is given),
/// layers[l + 1] = adj * layers[l].
LayerStack convolve_stack(const NormalizedAdjacency& adj, const Matrix& v0, const std::optional<Projection>& proj,
                          double epsilon, int layers);

/// Draws the dispersing vector from `rng` (skipped when epsilon == 0).
LayerStack convolve_stack(const NormalizedAdjacency& adj, const Matrix& v0, const DispersionConfig& cfg, int layers,
                          Rng& rng);

/// +1 for positive and zero entries, -1 for negative. Throws on NaN.
std::vector<std::int8_t> sign_binarize(std::span<const double> row);

/// ||row||_1 / d.
double rescale_factor(std::span<const double> row);

inline std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

/// Packs sign(row) into 64-bit words: bit i of word i/64 is set iff
/// row[i] >= 0. Padding bits stay 0.
void pack_signs(std::span<const double> row, std::span<std::uint64_t> words);
void pack_codes(std::span<const std::int8_t> codes, std::span<std::uint64_t> words);
std::vector<std::int8_t> unpack_codes(std::span<const std::uint64_t> words, std::size_t bits);

/// Per-node sign codes and float32 rescaling factors, one segment per hashed
/// layer. Storage is node-major: all segments of a node are contiguous.
class HashCodeTable {
 public:
  HashCodeTable() = default;
  HashCodeTable(std::size_t nodes, std::size_t bits, std::size_t segments);

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t bits() const noexcept { return bits_; }
  std::size_t segments() const noexcept { return segments_; }
  std::size_t words_per_segment() const noexcept { return words_; }

  std::span<const std::uint64_t> codes(std::size_t node, std::size_t segment) const;
  float scale(std::size_t node, std::size_t segment) const;
  std::span<const float> scales(std::size_t node) const;

  void set_segment(std::size_t node, std::size_t segment, std::span<const double> row, float scale);
  void set_segment_codes(std::size_t node, std::size_t segment, std::span<const std::int8_t> codes, float scale);

  std::vector<std::int8_t> unpack(std::size_t node, std::size_t segment) const;

  /// alpha * Q for one segment. Throws DimensionError on bad indices.
  Vector dequantize(std::size_t node, std::size_t segment) const;

  /// (L + 1) (d + 32): code bits plus float32 scales, excluding word padding.
  std::size_t payload_bits_per_node() const noexcept { return segments_ * (bits_ + 32); }
  /// Bits actually stored per node, including padding to 64-bit words.
  std::size_t stored_bits_per_node() const noexcept { return segments_ * (words_ * 64 + 32); }

  /// "BGCH" | u16 version | u64 nodes | u32 d | u32 L | per node: (L+1)
  /// float32 scales then (L+1) segments of ceil(d/64) u64 words, all LE.
  void write(std::ostream& out) const;
  static HashCodeTable read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static HashCodeTable load(const std::filesystem::path& path);
  static constexpr std::size_t kHeaderBytes = 4 + 2 + 8 + 4 + 4;

  friend bool operator==(const HashCodeTable&, const HashCodeTable&) = default;

 private:
  void check(std::size_t node, std::size_t segment) const;

  std::size_t nodes_ = 0;
  std::size_t bits_ = 0;
  std::size_t segments_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> codes_;
  std::vector<float> scales_;
};

/// Options controlling which layers are hashed and how they are scaled.
struct CodeTableOptions {
  bool topology_aware = true;  // false: hash only the last layer
  bool unit_scales = false;    // true: every alpha is 1
};

/// Hashes every layer (or only the last) of the stack into a table.
HashCodeTable build_code_table(const LayerStack& stack, const CodeTableOptions& options = {});

}  // namespace bgch

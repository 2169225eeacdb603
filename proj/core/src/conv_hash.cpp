#include "bgch/conv_hash.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "bgch/parallel.hpp"

namespace bgch {
namespace {

constexpr char kTableMagic[4] = {'B', 'G', 'C', 'H'};
constexpr std::uint16_t kTableVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated code table");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

}  // namespace

LayerStack convolve_stack(const NormalizedAdjacency& adj, const Matrix& v0, const std::optional<Projection>& proj,
                          double epsilon, int layers) {
  if (layers < 0) throw ConfigError("layer count must be >= 0");
  if (static_cast<std::size_t>(v0.rows()) != adj.size()) {
    throw DimensionError(fmt::format("embedding table has {} rows, graph has {} nodes", v0.rows(), adj.size()));
  }
  LayerStack stack;
  stack.layers.reserve(static_cast<std::size_t>(layers) + 1);
  stack.layers.push_back(proj && epsilon != 0.0 ? disperse(v0, *proj, epsilon) : v0);
  for (int l = 0; l < layers; ++l) stack.layers.push_back(adj.multiply(stack.layers.back()));
  return stack;
}

LayerStack convolve_stack(const NormalizedAdjacency& adj, const Matrix& v0, const DispersionConfig& cfg, int layers,
                          Rng& rng) {
  cfg.validate(layers);
  std::optional<Projection> proj;
  if (cfg.epsilon != 0.0) proj = power_iterate(v0, cfg.iterations, rng);
  return convolve_stack(adj, v0, proj, cfg.epsilon, layers);
}

std::vector<std::int8_t> sign_binarize(std::span<const double> row) {
  std::vector<std::int8_t> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (std::isnan(row[i])) throw Error(fmt::format("NaN at position {} cannot be binarized", i));
    out[i] = row[i] < 0.0 ? std::int8_t{-1} : std::int8_t{1};
  }
  return out;
}

double rescale_factor(std::span<const double> row) {
  if (row.empty()) return 0.0;
  double l1 = 0.0;
  for (double v : row) l1 += std::abs(v);
  return l1 / static_cast<double>(row.size());
}

void pack_signs(std::span<const double> row, std::span<std::uint64_t> words) {
  std::fill(words.begin(), words.end(), 0);
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (std::isnan(row[i])) throw Error(fmt::format("NaN at position {} cannot be binarized", i));
    if (!(row[i] < 0.0)) words[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

void pack_codes(std::span<const std::int8_t> codes, std::span<std::uint64_t> words) {
  std::fill(words.begin(), words.end(), 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] > 0) words[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

std::vector<std::int8_t> unpack_codes(std::span<const std::uint64_t> words, std::size_t bits) {
  std::vector<std::int8_t> out(bits);
  for (std::size_t i = 0; i < bits; ++i) out[i] = (words[i / 64] >> (i % 64)) & 1U ? 1 : -1;
  return out;
}

HashCodeTable::HashCodeTable(std::size_t nodes, std::size_t bits, std::size_t segments)
    : nodes_(nodes),
      bits_(bits),
      segments_(segments),
      words_(words_for_bits(bits)),
      codes_(nodes * segments * words_, 0),
      scales_(nodes * segments, 0.0F) {
  if (bits == 0 || segments == 0) throw DimensionError("code table needs d >= 1 and at least one segment");
}

void HashCodeTable::check(std::size_t node, std::size_t segment) const {
  if (node >= nodes_ || segment >= segments_) {
    throw DimensionError(fmt::format("code table index (node {}, segment {}) out of range ({} x {})", node, segment,
                                     nodes_, segments_));
  }
}

std::span<const std::uint64_t> HashCodeTable::codes(std::size_t node, std::size_t segment) const {
  check(node, segment);
  return {codes_.data() + (node * segments_ + segment) * words_, words_};
}

float HashCodeTable::scale(std::size_t node, std::size_t segment) const {
  check(node, segment);
  return scales_[node * segments_ + segment];
}

std::span<const float> HashCodeTable::scales(std::size_t node) const {
  check(node, 0);
  return {scales_.data() + node * segments_, segments_};
}

void HashCodeTable::set_segment(std::size_t node, std::size_t segment, std::span<const double> row, float scale) {
  check(node, segment);
  if (row.size() != bits_) throw DimensionError("row width differs from code width");
  pack_signs(row, {codes_.data() + (node * segments_ + segment) * words_, words_});
  scales_[node * segments_ + segment] = scale;
}

void HashCodeTable::set_segment_codes(std::size_t node, std::size_t segment, std::span<const std::int8_t> codes,
                                      float scale) {
  check(node, segment);
  if (codes.size() != bits_) throw DimensionError("code width mismatch");
  pack_codes(codes, {codes_.data() + (node * segments_ + segment) * words_, words_});
  scales_[node * segments_ + segment] = scale;
}

std::vector<std::int8_t> HashCodeTable::unpack(std::size_t node, std::size_t segment) const {
  return unpack_codes(codes(node, segment), bits_);
}

Vector HashCodeTable::dequantize(std::size_t node, std::size_t segment) const {
  const auto q = unpack(node, segment);
  const double alpha = scale(node, segment);
  Vector out(static_cast<Eigen::Index>(bits_));
  for (std::size_t i = 0; i < bits_; ++i) out[static_cast<Eigen::Index>(i)] = alpha * q[i];
  return out;
}

void HashCodeTable::write(std::ostream& out) const {
  out.write(kTableMagic, 4);
  put_le<std::uint16_t>(out, kTableVersion);
  put_le<std::uint64_t>(out, nodes_);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bits_));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(segments_ - 1));
  for (std::size_t node = 0; node < nodes_; ++node) {
    for (std::size_t s = 0; s < segments_; ++s) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(scales_[node * segments_ + s]));
    }
    const std::uint64_t* words = codes_.data() + node * segments_ * words_;
    for (std::size_t w = 0; w < segments_ * words_; ++w) put_le<std::uint64_t>(out, words[w]);
  }
}

HashCodeTable HashCodeTable::read(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kTableMagic, 4) != 0) throw FormatError("not a code table (bad magic)");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kTableVersion) throw FormatError(fmt::format("unsupported code table version {}", version));
  const auto nodes = get_le<std::uint64_t>(in);
  const auto bits = get_le<std::uint32_t>(in);
  const auto depth = get_le<std::uint32_t>(in);
  HashCodeTable table(nodes, bits, std::size_t{depth} + 1);
  for (std::size_t node = 0; node < table.nodes_; ++node) {
    for (std::size_t s = 0; s < table.segments_; ++s) {
      table.scales_[node * table.segments_ + s] = std::bit_cast<float>(get_le<std::uint32_t>(in));
    }
    std::uint64_t* words = table.codes_.data() + node * table.segments_ * table.words_;
    for (std::size_t w = 0; w < table.segments_ * table.words_; ++w) words[w] = get_le<std::uint64_t>(in);
  }
  // Padding bits must be zero so XOR + popcount stays exact.
  if (bits % 64 != 0) {
    const std::uint64_t pad_mask = ~((std::uint64_t{1} << (bits % 64)) - 1);
    for (std::size_t i = table.words_ - 1; i < table.codes_.size(); i += table.words_) {
      if (table.codes_[i] & pad_mask) throw FormatError("code table has non-zero padding bits");
    }
  }
  return table;
}

void HashCodeTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write code table: " + path.string());
  write(out);
}

HashCodeTable HashCodeTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open code table: " + path.string());
  return read(in);
}

HashCodeTable build_code_table(const LayerStack& stack, const CodeTableOptions& options) {
  if (stack.layers.empty()) throw DimensionError("layer stack is empty");
  const Matrix& first = stack.layers.front();
  const auto nodes = static_cast<std::size_t>(first.rows());
  const auto width = static_cast<std::size_t>(first.cols());
  const std::size_t first_layer = options.topology_aware ? 0 : stack.layers.size() - 1;
  const std::size_t segments = stack.layers.size() - first_layer;

  HashCodeTable table(nodes, width, segments);
  parallel_for(nodes, [&](std::size_t begin, std::size_t end) {
    for (std::size_t node = begin; node < end; ++node) {
      for (std::size_t s = 0; s < segments; ++s) {
        const Matrix& layer = stack.layers[first_layer + s];
        const std::span<const double> row(layer.data() + node * width, width);
        const double alpha = options.unit_scales ? 1.0 : rescale_factor(row);
        table.set_segment(node, s, row, static_cast<float>(alpha));
      }
    }
  });
  return table;
}

}  // namespace bgch

#include "bgch/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <string_view>

#include <spdlog/spdlog.h>

#include "bgch/logging.hpp"
#include "bgch/parallel.hpp"
#include "bgch/rng.hpp"

namespace bgch {
namespace {

constexpr char kGraphMagic[4] = {'B', 'G', 'R', 'F'};
constexpr std::uint16_t kGraphVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated graph cache");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_separator(char c, EdgeFormat format) {
  switch (format) {
    case EdgeFormat::csv:
      return c == ',';
    case EdgeFormat::tsv:
      return c == '\t' || c == ' ';
    case EdgeFormat::automatic:
      return c == '\t' || c == ' ' || c == ',';
  }
  return false;
}

// Splits off the first two fields; extra trailing fields (ratings,
// timestamps) are ignored.
bool parse_pair(std::string_view line, EdgeFormat format, std::uint64_t& a, std::uint64_t& b) {
  std::string_view fields[2];
  std::size_t found = 0;
  std::size_t pos = 0;
  while (found < 2 && pos < line.size()) {
    while (pos < line.size() && is_separator(line[pos], format)) {
      // A csv separator may be padded with spaces.
      ++pos;
      while (format == EdgeFormat::csv && pos < line.size() && line[pos] == ' ') ++pos;
    }
    const std::size_t start = pos;
    while (pos < line.size() && !is_separator(line[pos], format)) ++pos;
    if (pos > start) fields[found++] = trim(line.substr(start, pos - start));
  }
  if (found < 2) return false;
  for (int i = 0; i < 2; ++i) {
    std::uint64_t& dst = i == 0 ? a : b;
    const auto* first = fields[i].data();
    const auto* last = first + fields[i].size();
    auto [ptr, ec] = std::from_chars(first, last, dst);
    if (ec != std::errc() || ptr != last || fields[i].empty()) return false;
  }
  return true;
}

}  // namespace

BipartiteGraph BipartiteGraph::from_edges(std::size_t n1, std::size_t n2, std::vector<Edge> edges) {
  if (n1 + n2 > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("node count exceeds 32-bit index space");
  }
  for (const Edge& e : edges) {
    if (e.x >= n1 || e.y >= n2) {
      throw DimensionError("edge (" + std::to_string(e.x) + ", " + std::to_string(e.y) +
                           ") out of range for n1=" + std::to_string(n1) + ", n2=" + std::to_string(n2));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  BipartiteGraph g;
  g.n1_ = n1;
  g.n2_ = n2;
  g.edges_ = std::move(edges);

  const std::size_t n = n1 + n2;
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : g.edges_) {
    ++degree[e.x];
    ++degree[n1 + e.y];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  g.targets_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted by (x, y), so x rows fill in ascending y order; y rows
  // receive x in ascending order as well.
  for (const Edge& e : g.edges_) {
    g.targets_[cursor[e.x]++] = static_cast<std::uint32_t>(n1 + e.y);
    g.targets_[cursor[n1 + e.y]++] = e.x;
  }
  return g;
}

std::vector<NodeId> BipartiteGraph::items_of(NodeId x) const {
  std::vector<NodeId> out;
  for (auto t : neighbors(x)) out.push_back(static_cast<NodeId>(t - n1_));
  return out;
}

bool BipartiteGraph::has_edge(NodeId x, NodeId y) const noexcept {
  if (x >= n1_ || y >= n2_) return false;
  auto row = neighbors(x);
  return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(n1_ + y));
}

std::size_t BipartiteGraph::isolated_count() const noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < num_nodes(); ++i) count += degree(i) == 0;
  return count;
}

double BipartiteGraph::density() const noexcept {
  if (n1_ == 0 || n2_ == 0) return 0.0;
  return static_cast<double>(edges_.size()) / (static_cast<double>(n1_) * static_cast<double>(n2_));
}

LoadedGraph load_edge_list(const std::filesystem::path& path, EdgeFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list: " + path.string());

  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    if (!parse_pair(view, format, a, b)) {
      throw ParseError("malformed edge line '" + std::string(view) + "' in " + path.string(), line_no);
    }
    raw.emplace_back(a, b);
  }
  if (raw.empty()) throw EmptyGraphError("edge list contains no edges: " + path.string());

  LoadedGraph out;
  for (const auto& [a, b] : raw) {
    out.x_ids.push_back(a);
    out.y_ids.push_back(b);
  }
  auto densify = [](std::vector<std::uint64_t>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  };
  densify(out.x_ids);
  densify(out.y_ids);
  auto index_of = [](const std::vector<std::uint64_t>& ids, std::uint64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& [a, b] : raw) edges.push_back({index_of(out.x_ids, a), index_of(out.y_ids, b)});
  out.graph = BipartiteGraph::from_edges(out.x_ids.size(), out.y_ids.size(), std::move(edges));
  if (out.graph.num_edges() < raw.size()) {
    logger()->debug("collapsed {} duplicate edge lines", raw.size() - out.graph.num_edges());
  }
  return out;
}

void save_edge_list(const BipartiteGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write edge list: " + path.string());
  for (const Edge& e : g.edges()) out << e.x << '\t' << e.y << '\n';
}

void save_graph_cache(const BipartiteGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write graph cache: " + path.string());
  out.write(kGraphMagic, 4);
  write_le<std::uint16_t>(out, kGraphVersion);
  write_le<std::uint64_t>(out, g.n1());
  write_le<std::uint64_t>(out, g.n2());
  write_le<std::uint64_t>(out, g.num_edges());
  for (const Edge& e : g.edges()) {
    write_le<std::uint32_t>(out, e.x);
    write_le<std::uint32_t>(out, e.y);
  }
}

BipartiteGraph load_graph_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open graph cache: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kGraphMagic)) {
    throw FormatError("not a graph cache (bad magic): " + path.string());
  }
  const auto version = read_le<std::uint16_t>(in);
  if (version != kGraphVersion) throw FormatError("unsupported graph cache version " + std::to_string(version));
  const auto n1 = read_le<std::uint64_t>(in);
  const auto n2 = read_le<std::uint64_t>(in);
  const auto m = read_le<std::uint64_t>(in);
  std::vector<Edge> edges(m);
  for (auto& e : edges) {
    e.x = read_le<std::uint32_t>(in);
    e.y = read_le<std::uint32_t>(in);
  }
  return BipartiteGraph::from_edges(n1, n2, std::move(edges));
}

double NormalizedAdjacency::at(std::size_t r, std::size_t c) const noexcept {
  auto cols = row_columns(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(c));
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

Matrix NormalizedAdjacency::multiply(const Matrix& in) const {
  Matrix out(in.rows(), in.cols());
  multiply_into(in, out);
  return out;
}

void NormalizedAdjacency::multiply_into(const Matrix& in, Matrix& out) const {
  if (static_cast<std::size_t>(in.rows()) != size()) {
    throw DimensionError("adjacency has " + std::to_string(size()) + " rows but operand has " +
                         std::to_string(in.rows()));
  }
  out.resize(in.rows(), in.cols());
  parallel_for(size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto dst = out.row(static_cast<Eigen::Index>(r));
      dst.setZero();
      auto cols = row_columns(r);
      auto vals = row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) dst.noalias() += vals[k] * in.row(cols[k]);
    }
  });
}

Matrix NormalizedAdjacency::to_dense() const {
  Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
  for (std::size_t r = 0; r < size(); ++r) {
    auto cols = row_columns(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) dense(static_cast<Eigen::Index>(r), cols[k]) = vals[k];
  }
  return dense;
}

NormalizedAdjacency normalize(const BipartiteGraph& g) {
  if (g.num_edges() == 0) throw EmptyGraphError("cannot normalize a graph without edges");
  NormalizedAdjacency adj;
  adj.offsets_ = g.row_offsets();
  adj.columns_ = g.column_indices();
  adj.values_.resize(adj.columns_.size());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) adj.isolated_ += g.degree(i) == 0;
  for (std::size_t r = 0; r < g.num_nodes(); ++r) {
    const auto dr = static_cast<double>(g.degree(r));
    for (std::size_t k = adj.offsets_[r]; k < adj.offsets_[r + 1]; ++k) {
      adj.values_[k] = 1.0 / std::sqrt(dr * static_cast<double>(g.degree(adj.columns_[k])));
    }
  }
  if (adj.isolated_ > 0) logger()->info("{} isolated nodes have empty adjacency rows", adj.isolated_);
  return adj;
}

BipartiteGraph DataSplit::train_graph() const { return BipartiteGraph::from_edges(n1, n2, train); }

std::vector<std::vector<NodeId>> DataSplit::held_out() const {
  std::vector<std::vector<NodeId>> out(n1);
  for (const Edge& e : test) out[e.x].push_back(e.y);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

DataSplit split(const BipartiteGraph& g, double test_ratio, std::uint64_t seed) {
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) {
    throw ConfigError("test ratio must lie in (0, 1), got " + std::to_string(test_ratio));
  }
  Rng rng = make_stream(seed, "split");

  struct Quota {
    NodeId x;
    std::size_t take;
    std::size_t capacity;
    double remainder;
    std::uint64_t tiebreak;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  std::size_t singletons = 0;
  for (NodeId x = 0; x < g.n1(); ++x) {
    const std::size_t deg = g.degree(x);
    if (deg == 0) continue;
    if (deg == 1) ++singletons;
    const double exact = static_cast<double>(deg) * test_ratio;
    const std::size_t capacity = deg - 1;
    const std::size_t take = std::min(capacity, static_cast<std::size_t>(std::floor(exact)));
    quotas.push_back({x, take, capacity, exact - std::floor(exact), rng()});
    assigned += take;
  }
  if (singletons > 0) logger()->debug("{} x-nodes have a single edge and contribute no test edge", singletons);

  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(g.num_edges()) * test_ratio));
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quotas[a].remainder != quotas[b].remainder) return quotas[a].remainder > quotas[b].remainder;
    return quotas[a].tiebreak < quotas[b].tiebreak;
  });
  // Largest remainder first; loop again if capacity limits left a deficit.
  bool progress = true;
  while (assigned < target && progress) {
    progress = false;
    for (std::size_t idx : order) {
      if (assigned >= target) break;
      if (quotas[idx].take < quotas[idx].capacity) {
        ++quotas[idx].take;
        ++assigned;
        progress = true;
      }
    }
  }

  DataSplit out;
  out.n1 = g.n1();
  out.n2 = g.n2();
  out.test_ratio = test_ratio;
  out.seed = seed;
  for (const Quota& q : quotas) {
    std::vector<NodeId> items = g.items_of(q.x);
    std::shuffle(items.begin(), items.end(), rng);
    for (std::size_t i = 0; i < items.size(); ++i) {
      (i < q.take ? out.test : out.train).push_back({q.x, items[i]});
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

BipartiteGraph planted_partition(std::size_t n1, std::size_t n2, std::size_t clusters, double p_in,
                                 double p_out, std::uint64_t seed) {
  if (clusters == 0) throw ConfigError("planted partition needs at least one cluster");
  Rng rng = make_stream(seed, "planted");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t x = 0; x < n1; ++x) {
    const std::size_t cx = x * clusters / n1;
    for (std::size_t y = 0; y < n2; ++y) {
      const std::size_t cy = y * clusters / n2;
      const double p = cx == cy ? p_in : p_out;
      if (unit(rng) < p) edges.push_back({static_cast<NodeId>(x), static_cast<NodeId>(y)});
    }
  }
  return BipartiteGraph::from_edges(n1, n2, std::move(edges));
}

}  // namespace bgch

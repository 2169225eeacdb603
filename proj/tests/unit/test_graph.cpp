#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "bgch/graph.hpp"
#include "test_support.hpp"

using namespace bgch;
using bgch::testing::temp_dir;
using bgch::testing::write_file;

namespace {

BipartiteGraph make(std::size_t n1, std::size_t n2, std::vector<Edge> edges) {
  return BipartiteGraph::from_edges(n1, n2, std::move(edges));
}

}  // namespace

TEST(LoadEdgeList, CountsDistinctIds) {
  const auto dir = temp_dir("load_counts");
  const auto g = load_edge_list(write_file(dir / "e.tsv", "0 0\n0 1\n1 1\n")).graph;
  EXPECT_EQ(g.n1(), 2u);
  EXPECT_EQ(g.n2(), 2u);
  EXPECT_EQ(g.num_edges(), 3u);
}

TEST(LoadEdgeList, DuplicateLinesCollapse) {
  const auto dir = temp_dir("load_dup");
  const auto g = load_edge_list(write_file(dir / "e.tsv", "0 0\n0 0\n")).graph;
  EXPECT_EQ(g.num_edges(), 1u);
}

TEST(LoadEdgeList, DensifiesSparseIds) {
  const auto dir = temp_dir("load_dense");
  const auto loaded = load_edge_list(write_file(dir / "e.csv", "# header\n100,7\n\n5,7\n100,900\n"));
  EXPECT_EQ(loaded.graph.n1(), 2u);
  EXPECT_EQ(loaded.graph.n2(), 2u);
  EXPECT_EQ(loaded.x_ids, (std::vector<std::uint64_t>{5, 100}));
  EXPECT_EQ(loaded.y_ids, (std::vector<std::uint64_t>{7, 900}));
  EXPECT_TRUE(loaded.graph.has_edge(1, 1));
  EXPECT_TRUE(loaded.graph.has_edge(0, 0));
  EXPECT_FALSE(loaded.graph.has_edge(0, 1));
}

TEST(LoadEdgeList, TabSeparatedWithExtraColumns) {
  const auto dir = temp_dir("load_tab");
  const auto g = load_edge_list(write_file(dir / "e.tsv", "1\t2\t5\t881250949\n2\t2\t3\t0\n")).graph;
  EXPECT_EQ(g.num_edges(), 2u);
}

TEST(LoadEdgeList, MalformedLineReportsLineNumber) {
  const auto dir = temp_dir("load_bad");
  const auto path = write_file(dir / "e.tsv", "0 0\n# ok\n1 x\n");
  try {
    load_edge_list(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadEdgeList, NegativeIdIsMalformed) {
  const auto dir = temp_dir("load_neg");
  EXPECT_THROW(load_edge_list(write_file(dir / "e.tsv", "-1 0\n")), ParseError);
}

TEST(LoadEdgeList, EmptyFileThrows) {
  const auto dir = temp_dir("load_empty");
  EXPECT_THROW(load_edge_list(write_file(dir / "e.tsv", "")), EmptyGraphError);
  EXPECT_THROW(load_edge_list(write_file(dir / "c.tsv", "# only a comment\n\n")), EmptyGraphError);
}

TEST(LoadEdgeList, SameIdOnBothSidesIsAnOrdinaryEdge) {
  const auto dir = temp_dir("load_same");
  const auto g = load_edge_list(write_file(dir / "e.tsv", "3 3\n")).graph;
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.num_nodes(), 2u);
}

TEST(BipartiteGraph, RejectsOutOfRangeIds) {
  EXPECT_THROW(make(2, 2, {{2, 0}}), DimensionError);
  EXPECT_THROW(make(2, 2, {{0, 2}}), DimensionError);
}

TEST(BipartiteGraph, AdjacencyIsSymmetricAndBlockAntidiagonal) {
  std::mt19937_64 rng(3);
  const auto g = bgch::testing::random_graph(7, 9, 0.3, rng);
  for (std::size_t r = 0; r < g.num_nodes(); ++r) {
    for (auto c : g.neighbors(r)) {
      EXPECT_NE(r < g.n1(), c < g.n1());
      const auto back = g.neighbors(c);
      EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<std::uint32_t>(r)));
    }
  }
}

TEST(BipartiteGraph, DensityIsEdgesOverPossiblePairs) {
  const auto g = make(2, 4, {{0, 0}, {0, 1}, {1, 3}});
  EXPECT_DOUBLE_EQ(g.density(), 3.0 / 8.0);
}

TEST(BipartiteGraph, IsolatedNodesAreCounted) {
  const auto g = make(3, 2, {{0, 0}, {1, 0}});
  EXPECT_EQ(g.isolated_count(), 2u);  // x2 and y1
  const auto adj = normalize(g);
  EXPECT_EQ(adj.isolated_count(), 2u);
  EXPECT_TRUE(adj.row_columns(2).empty());
  EXPECT_TRUE(adj.row_columns(4).empty());
}

TEST(Normalize, StarGraph) {
  const auto adj = normalize(make(1, 2, {{0, 0}, {0, 1}}));
  EXPECT_NEAR(adj.at(0, 1), 0.70711, 1e-5);
  EXPECT_NEAR(adj.at(0, 2), 0.70711, 1e-5);
  EXPECT_DOUBLE_EQ(adj.at(0, 1), 1.0 / std::sqrt(2.0));
}

TEST(Normalize, SingleEdgeIsExactlyOne) {
  const auto adj = normalize(make(1, 1, {{0, 0}}));
  EXPECT_EQ(adj.at(0, 1), 1.0);
  EXPECT_EQ(adj.at(1, 0), 1.0);
}

TEST(Normalize, CompleteTwoByTwo) {
  const auto adj = normalize(make(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  for (std::size_t r = 0; r < 4; ++r) {
    for (auto c : adj.row_columns(r)) EXPECT_EQ(adj.at(r, c), 0.5);
  }
}

TEST(Normalize, EmptyGraphThrows) { EXPECT_THROW(normalize(make(2, 2, {})), EmptyGraphError); }

TEST(Normalize, RowCountsMatchDegrees) {
  std::mt19937_64 rng(5);
  const auto g = bgch::testing::random_graph(10, 12, 0.25, rng);
  const auto adj = normalize(g);
  for (std::size_t r = 0; r < g.num_nodes(); ++r) EXPECT_EQ(adj.row_columns(r).size(), g.degree(r));
}

TEST(Normalize, OnesVectorMatchesDenseBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = bgch::testing::random_graph(1 + rng() % 20, 1 + rng() % 25, 0.2, rng);
    ASSERT_LE(g.num_nodes(), 50u);
    const Matrix dense = bgch::testing::dense_normalized(g);
    const Matrix ones = Matrix::Ones(static_cast<Eigen::Index>(g.num_nodes()), 1);
    const Matrix got = normalize(g).multiply(ones);
    for (std::size_t r = 0; r < g.num_nodes(); ++r) {
      double expect = 0.0;
      for (auto z : g.neighbors(r)) expect += 1.0 / std::sqrt(static_cast<double>(g.degree(r) * g.degree(z)));
      EXPECT_NEAR(got(static_cast<Eigen::Index>(r), 0), expect, 1e-12);
      EXPECT_NEAR(got(static_cast<Eigen::Index>(r), 0), dense.row(static_cast<Eigen::Index>(r)).sum(), 1e-12);
    }
  }
}

TEST(Normalize, SparseTimesDenseMatchesDense) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = bgch::testing::random_graph(2 + rng() % 15, 2 + rng() % 15, 0.3, rng);
    const auto adj = normalize(g);
    const Matrix dense = bgch::testing::dense_normalized(g);
    EXPECT_LT((adj.to_dense() - dense).cwiseAbs().maxCoeff(), 1e-15);
    const Matrix v = bgch::testing::random_matrix(static_cast<Eigen::Index>(g.num_nodes()), 5, rng);
    EXPECT_LT((adj.multiply(v) - dense * v).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Normalize, MultiplyRejectsWrongShape) {
  const auto adj = normalize(make(1, 1, {{0, 0}}));
  EXPECT_THROW(adj.multiply(Matrix::Zero(3, 2)), DimensionError);
}

TEST(Serialization, EdgeListRoundTrip) {
  std::mt19937_64 rng(17);
  const auto g = bgch::testing::random_graph(8, 6, 0.4, rng);
  const auto dir = temp_dir("roundtrip_text");
  save_edge_list(g, dir / "g.tsv");
  const auto back = load_edge_list(dir / "g.tsv").graph;
  EXPECT_TRUE(std::equal(g.edges().begin(), g.edges().end(), back.edges().begin(), back.edges().end()));
}

TEST(Serialization, BinaryCacheRoundTrip) {
  std::mt19937_64 rng(19);
  const auto g = bgch::testing::random_graph(9, 11, 0.3, rng);
  const auto dir = temp_dir("roundtrip_bin");
  save_graph_cache(g, dir / "g.bgrf");
  EXPECT_EQ(load_graph_cache(dir / "g.bgrf"), g);
  const std::string bytes = bgch::testing::read_file(dir / "g.bgrf");
  EXPECT_EQ(bytes.substr(0, 4), "BGRF");
  EXPECT_EQ(bytes.size(), 4 + 2 + 3 * 8 + 8 * g.num_edges());
}

TEST(Serialization, BinaryCacheRejectsBadMagic) {
  const auto dir = temp_dir("bad_magic");
  write_file(dir / "g.bgrf", "NOPE0000000000000000000000000000");
  EXPECT_THROW(load_graph_cache(dir / "g.bgrf"), FormatError);
}

TEST(Split, TenEdgesTwentyPercent) {
  std::vector<Edge> edges;
  for (NodeId x = 0; x < 2; ++x)
    for (NodeId y = 0; y < 5; ++y) edges.push_back({x, y});
  const auto g = make(2, 5, edges);
  const auto s = split(g, 0.2, 7);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  const auto again = split(g, 0.2, 7);
  EXPECT_EQ(s.train, again.train);
  EXPECT_EQ(s.test, again.test);
}

TEST(Split, DegreeOneNodeStaysInTrain) {
  const auto g = make(2, 4, {{0, 0}, {1, 0}, {1, 1}, {1, 2}, {1, 3}});
  const auto s = split(g, 0.5, 1);
  EXPECT_TRUE(std::find(s.train.begin(), s.train.end(), Edge{0, 0}) != s.train.end());
}

TEST(Split, PartitionInvariants) {
  std::mt19937_64 rng(23);
  const auto g = bgch::testing::random_graph(30, 40, 0.15, rng);
  for (double ratio : {0.1, 0.2, 0.5}) {
    const auto s = split(g, ratio, 99);
    std::set<Edge> tr(s.train.begin(), s.train.end());
    std::set<Edge> te(s.test.begin(), s.test.end());
    for (const Edge& e : te) EXPECT_EQ(tr.count(e), 0u);
    EXPECT_EQ(tr.size() + te.size(), g.num_edges());
    std::set<NodeId> train_x;
    for (const Edge& e : s.train) train_x.insert(e.x);
    for (const Edge& e : s.test) EXPECT_TRUE(train_x.count(e.x));
    const auto held = s.held_out();
    std::size_t total = 0;
    for (const auto& h : held) total += h.size();
    EXPECT_EQ(total, te.size());
    EXPECT_EQ(s.train_graph().num_edges(), tr.size());
  }
}

TEST(Split, DifferentSeedsDiffer) {
  std::mt19937_64 rng(29);
  const auto g = bgch::testing::random_graph(30, 40, 0.2, rng);
  EXPECT_NE(split(g, 0.2, 1).test, split(g, 0.2, 2).test);
}

TEST(Split, RatioOutsideOpenIntervalThrows) {
  const auto g = make(1, 2, {{0, 0}, {0, 1}});
  EXPECT_THROW(split(g, 0.0, 1), ConfigError);
  EXPECT_THROW(split(g, 1.0, 1), ConfigError);
}

TEST(PlantedPartition, DeterministicAndClustered) {
  const auto a = planted_partition(20, 20, 2, 0.8, 0.05, 4);
  const auto b = planted_partition(20, 20, 2, 0.8, 0.05, 4);
  EXPECT_EQ(a, b);
  std::size_t within = 0;
  for (const Edge& e : a.edges()) within += (e.x * 2 / 20) == (e.y * 2 / 20) ? 1 : 0;
  EXPECT_GT(within, a.num_edges() * 3 / 4);
}

#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "poisonbench/common.hpp"
#include "poisonbench/tagraph/io.hpp"
#include "poisonbench/tagraph/sampling.hpp"
#include "poisonbench/tagraph/synthetic.hpp"

using namespace poisonbench;
using pbtest::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& body) { std::ofstream(p, std::ios::binary) << body; }

TextAttributedGraph tiny() {
  std::vector<std::pair<NodeId, NodeId>> pairs = {{0, 1}, {1, 2}, {2, 3}};
  return TextAttributedGraph::build(4, pairs, {"a b", "tab\there", "line\nbreak", "back\\slash"}, {0, 1, 1, 0}, 2);
}

}  // namespace

TEST(Common, FloorFractionToleratesRepresentationError) {
  EXPECT_EQ(floor_fraction(0.29, 100), 29u);
  EXPECT_EQ(floor_fraction(0.1, 1000), 100u);
  EXPECT_EQ(floor_fraction(0.2, 7), 1u);
  EXPECT_EQ(floor_fraction(0.0, 50), 0u);
  EXPECT_EQ(floor_fraction(1.0, 50), 50u);
}

TEST(Common, FnvMatchesReferenceVectors) {
  // published FNV-1a 64 test vectors
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Common, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t c = 0; c < 20; ++c) seen.insert(derive_seed(s, c));
  }
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(3, 4), derive_seed(3, 4));
}

TEST(Graph, BuildCanonicalizesAndReports) {
  std::vector<std::pair<NodeId, NodeId>> pairs = {{2, 0}, {0, 2}, {1, 1}, {1, 2}, {2, 1}, {0, 2}};
  BuildReport rep;
  auto g = TextAttributedGraph::build(3, pairs, {"x", "y", "z"}, {0, 0, 1}, 2, &rep);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(rep.self_loops, 1u);
  EXPECT_EQ(rep.duplicate_edges, 3u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 2}));
  EXPECT_EQ(g.edges()[1], (Edge{1, 2}));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_EQ(g.degree(2), 2u);
  std::vector<NodeId> nb(g.neighbors(2).begin(), g.neighbors(2).end());
  EXPECT_EQ(nb, (std::vector<NodeId>{0, 1}));
}

TEST(Graph, BuildRejectsBadInput) {
  std::vector<std::pair<NodeId, NodeId>> bad_edge = {{0, 5}};
  EXPECT_THROW(TextAttributedGraph::build(2, bad_edge, {"a", "b"}, {0, 0}, 1), ValidationError);
  EXPECT_THROW(TextAttributedGraph::build(2, {}, {"a"}, {0, 0}, 1), ValidationError);
  EXPECT_THROW(TextAttributedGraph::build(2, {}, {"a", "b"}, {0, 2}, 2), ValidationError);
  EXPECT_THROW(TextAttributedGraph::build(2, {}, {"a", "b"}, {0, -1}, 2), ValidationError);
}

TEST(Graph, PropertyDegreesSumToTwiceEdges) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto g = pbtest::random_graph(25, 0.2, 3, seed);
    std::size_t total = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      total += g.degree(v);
      for (NodeId u : g.neighbors(v)) EXPECT_TRUE(g.has_edge(u, v));
    }
    EXPECT_EQ(total, 2 * g.num_edges());
    EXPECT_TRUE(std::is_sorted(g.edges().begin(), g.edges().end()));
  }
}

TEST(Io, EscapeRoundTrip) {
  for (std::string s : {"plain", "a\tb", "x\ny\r\nz", "back\\slash\\t", "", "\\"}) {
    EXPECT_EQ(unescape_text(escape_text(s)), s);
    EXPECT_EQ(escape_text(s).find('\n'), std::string::npos);
  }
}

TEST(Io, SaveLoadRoundTrip) {
  TempDir dir;
  auto g = tiny();
  save_graph(g, dir.path());
  EXPECT_EQ(load_graph_dir(dir.path()), g);
  auto big = generate_synthetic_tag({.num_nodes = 120, .num_classes = 4, .vocab_size = 80, .seed = 3});
  save_graph(big, dir / "big");
  EXPECT_EQ(load_graph_dir(dir / "big"), big);
}

TEST(Io, ChecksumMismatchDetected) {
  TempDir dir;
  save_graph(tiny(), dir.path());
  write_file(dir / "edges.tsv", "0\t1\n");
  EXPECT_THROW(load_graph_dir(dir.path()), ValidationError);
}

TEST(Io, ParseErrorsCarryLineNumbers) {
  TempDir dir;
  write_file(dir / "texts.txt", "a\nb\nc\n");
  write_file(dir / "labels.txt", "C=2\n0\n1\n1\n");
  write_file(dir / "edges.tsv", "# comment\n0\t1\n1 x\n");
  try {
    load_graph(dir / "edges.tsv", dir / "texts.txt", dir / "labels.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }

  write_file(dir / "edges.tsv", "0\t1\n");
  write_file(dir / "labels.txt", "0\n1\n");
  EXPECT_THROW(load_graph(dir / "edges.tsv", dir / "texts.txt", dir / "labels.txt"), ParseError);

  write_file(dir / "labels.txt", "C=2\n0\nzero\n1\n");
  try {
    load_graph(dir / "edges.tsv", dir / "texts.txt", dir / "labels.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }

  // label out of range is a data-model violation, not a syntax error
  write_file(dir / "labels.txt", "C=2\n0\n5\n1\n");
  EXPECT_THROW(load_graph(dir / "edges.tsv", dir / "texts.txt", dir / "labels.txt"), ValidationError);
}

TEST(Io, ReversedDuplicatesMergedOnLoad) {
  TempDir dir;
  write_file(dir / "texts.txt", "a\nb\nc\n");
  write_file(dir / "labels.txt", "C=1\n0\n0\n0\n");
  write_file(dir / "edges.tsv", "0\t1\n1\t0\n2\t2\n1\t2\n");
  BuildReport rep;
  auto g = load_graph(dir / "edges.tsv", dir / "texts.txt", dir / "labels.txt", &rep);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(rep.duplicate_edges, 1u);
  EXPECT_EQ(rep.self_loops, 1u);
}

TEST(Synthetic, BalancedAndHomophilous) {
  SbmParams p{.num_nodes = 500, .num_classes = 5, .intra_edge_prob = 0.05, .inter_edge_prob = 0.005, .seed = 11};
  auto g = generate_synthetic_tag(p);
  std::vector<int> counts(5, 0);
  for (ClassId y : g.labels()) ++counts[y];
  for (int c : counts) EXPECT_EQ(c, 100);
  std::size_t same = 0;
  for (const Edge& e : g.edges()) same += g.labels()[e.u] == g.labels()[e.v];
  const double h = static_cast<double>(same) / g.num_edges();
  EXPECT_NEAR(h, expected_sbm_homophily(p), 0.05);
  for (const auto& t : g.texts()) EXPECT_EQ(std::count(t.begin(), t.end(), ' '), 19);
  EXPECT_EQ(generate_synthetic_tag(p), g);
}

TEST(Synthetic, ValidateRejects) {
  EXPECT_THROW(generate_synthetic_tag({.num_nodes = 3, .num_classes = 5}), ConfigError);
  EXPECT_THROW(generate_synthetic_tag({.intra_edge_prob = 1.5}), ConfigError);
  EXPECT_THROW(generate_synthetic_tag({.vocab_size = 2}), ConfigError);
}

TEST(Synthetic, WordsAreDistinct) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 5000; ++i) {
    auto w = synthetic_word(i);
    EXPECT_GE(w.size(), 4u);
    seen.insert(w);
  }
  EXPECT_EQ(seen.size(), 5000u);
}

TEST(Split, SizesDisjointDeterministic) {
  auto g = pbtest::random_graph(101, 0.05, 3, 1);
  auto s = split_nodes(g, 0.1, 0.2, 9);
  EXPECT_EQ(s.train.size(), 10u);
  EXPECT_EQ(s.val.size(), 20u);
  EXPECT_EQ(s.test.size(), 71u);
  EXPECT_NO_THROW(s.validate(g.num_nodes()));
  EXPECT_EQ(split_nodes(g, 0.1, 0.2, 9), s);
  EXPECT_NE(split_nodes(g, 0.1, 0.2, 10), s);
  EXPECT_THROW(split_nodes(g, 0.6, 0.4, 0), ConfigError);
  EXPECT_THROW(split_nodes(g, 0.001, 0.1, 0), ConfigError);
}

TEST(Split, ValidateCatchesOverlap) {
  NodeSplit s{{0, 1}, {1}, {2}};
  EXPECT_THROW(s.validate(3), ValidationError);
  NodeSplit empty{{}, {0}, {1}};
  EXPECT_THROW(empty.validate(3), ValidationError);
  NodeSplit range{{0}, {}, {7}};
  EXPECT_THROW(range.validate(3), ValidationError);
}

TEST(Sampling, InducedSubgraphKeepsInternalEdges) {
  auto g = pbtest::random_graph(30, 0.2, 2, 4);
  std::vector<NodeId> nodes = {17, 3, 25, 8, 12};
  auto sub = induced_subgraph(g, nodes);
  std::sort(nodes.begin(), nodes.end());
  ASSERT_EQ(sub.num_nodes(), nodes.size());
  for (NodeId i = 0; i < nodes.size(); ++i) {
    EXPECT_EQ(sub.texts()[i], g.texts()[nodes[i]]);
    EXPECT_EQ(sub.labels()[i], g.labels()[nodes[i]]);
    for (NodeId j = i + 1; j < nodes.size(); ++j) EXPECT_EQ(sub.has_edge(i, j), g.has_edge(nodes[i], nodes[j]));
  }
}

TEST(Sampling, SampleSubsetBounds) {
  auto g = pbtest::random_graph(200, 0.05, 3, 5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto sub = sample_subset(g, 5, 3, 2, seed);
    // 5 seeds, at most 3 new nodes each per hop
    EXPECT_GE(sub.num_nodes(), 5u);
    EXPECT_LE(sub.num_nodes(), 5u + 15u + 45u);
    EXPECT_EQ(sample_subset(g, 5, 3, 2, seed), sub);
  }
  EXPECT_THROW(sample_subset(g, 0, 3, 2, 0), ConfigError);
  EXPECT_THROW(sample_subset(g, 5, 3, 0, 0), ConfigError);
}

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "targeted_oracle.hpp"
#include "poisonbench/attacks/combined.hpp"
#include "poisonbench/attacks/dice.hpp"
#include "poisonbench/attacks/meta_gradient.hpp"
#include "poisonbench/attacks/perturbation.hpp"
#include "poisonbench/attacks/random_flips.hpp"
#include "poisonbench/attacks/targeted.hpp"
#include "poisonbench/attacks/targets.hpp"
#include "poisonbench/attacks/text_surrogate.hpp"
#include "poisonbench/attacks/textual.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/metrics/metrics.hpp"
#include "poisonbench/tagraph/sampling.hpp"
#include "poisonbench/tagraph/synthetic.hpp"

using namespace poisonbench;
using pbtest::TempDir;

namespace {

struct Data {
  TextAttributedGraph graph;
  EmbeddingMatrix features;
  NodeSplit split;
  Vocabulary vocab;
};

Data sbm(std::size_t n, std::uint64_t seed, double skew = 0.3) {
  auto g = generate_synthetic_tag({.num_nodes = n,
                                   .num_classes = 4,
                                   .intra_edge_prob = 40.0 / static_cast<double>(n),
                                   .inter_edge_prob = 4.0 / static_cast<double>(n),
                                   .vocab_size = 200,
                                   .words_per_node = 15,
                                   .class_word_skew = skew,
                                   .seed = seed});
  auto vocab = build_vocab(g.texts(), 10000, 1);
  auto split = split_nodes(g, 0.1, 0.1, seed);
  auto feats = bow_embed(g.texts(), vocab);
  return {g, feats, split, vocab};
}

BudgetSpec rate(double r) { return {.structural_mode = StructuralMode::global_rate, .global_rate = r}; }
BudgetSpec per_target(int k) { return {.structural_mode = StructuralMode::per_target, .per_target = k}; }
BudgetSpec edits(int k) { return {.textual_edits_per_node = k}; }

}  // namespace

TEST(Perturbation, JsonAndFileRoundTrip) {
  PerturbationSet p;
  p.attack_name = "combined";
  p.seed = 42;
  p.budget = {.structural_mode = StructuralMode::global_rate, .global_rate = 0.05, .textual_edits_per_node = 2};
  p.edge_flips = {{0, 3, FlipKind::add}, {1, 2, FlipKind::remove}};
  p.text_edits = {{2, "swap", 1, ""}, {2, "word", 0, "delta"}};
  p.warnings = {"partial"};
  EXPECT_EQ(perturbation_from_json(to_json(p)), p);
  TempDir dir;
  save_perturbation(p, dir / "p.json");
  auto back = load_perturbation(dir / "p.json");
  EXPECT_EQ(back, p);
  EXPECT_EQ(back.content_hash(), p.content_hash());
  auto q = p;
  q.seed = 43;
  EXPECT_NE(q.content_hash(), p.content_hash());
}

TEST(Perturbation, ApplyIsAllOrNothing) {
  std::vector<std::pair<NodeId, NodeId>> pairs = {{0, 1}, {1, 2}};
  auto g = TextAttributedGraph::build(4, pairs, {"aa bb", "cc", "dd", "ee"}, {0, 0, 1, 1}, 2);
  PerturbationSet p;
  p.budget = {.global_rate = 1.0, .textual_edits_per_node = 1};
  p.edge_flips = {{0, 1, FlipKind::remove}, {2, 3, FlipKind::add}};
  p.text_edits = {{0, "sub", 0, "x"}};
  auto out = apply_perturbation(g, p);
  EXPECT_FALSE(out.has_edge(0, 1));
  EXPECT_TRUE(out.has_edge(2, 3));
  EXPECT_EQ(out.texts()[0], "xa bb");
  EXPECT_EQ(g.num_edges(), 2u);

  auto bad = p;
  bad.edge_flips.push_back({0, 2, FlipKind::remove});  // absent edge
  EXPECT_THROW(apply_perturbation(g, bad), ValidationError);
  bad = p;
  bad.text_edits.push_back({3, "sub", 99, "x"});
  EXPECT_THROW(apply_perturbation(g, bad), ValidationError);
  bad = p;
  bad.edge_flips.push_back({0, 1, FlipKind::remove});  // duplicate
  EXPECT_THROW(bad.validate(g), ValidationError);
  bad = p;
  bad.budget.global_rate = 0.5;  // floor(0.5 * 2) = 1 < 2 flips
  EXPECT_THROW(bad.validate(g), ValidationError);
}

TEST(Perturbation, TextEditOps) {
  std::vector<std::string> t = {"hello world"};
  std::vector<TextEdit> e = {{0, "swap", 0, ""}, {0, "del", 4, ""}, {0, "ins", 0, "z"}, {0, "word", 6, "there"}};
  // ehllo world -> ehll world -> zehll world -> zehll there
  EXPECT_EQ(apply_text_edits(t, e)[0], "zehll there");
  std::vector<TextEdit> unknown = {{0, "rot13", 0, ""}};
  EXPECT_THROW(apply_text_edits(t, unknown), ValidationError);
}

TEST(Perturbation, EditDistanceOsa) {
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("ab", "ba"), 1u);
  EXPECT_EQ(edit_distance("ca", "abc"), 3u);  // OSA forbids editing a transposed pair again
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("same", "same"), 0u);
}

TEST(Budget, MaxFlipsAndValidation) {
  EXPECT_EQ(rate(0.2).max_flips(101, 0), 20u);
  EXPECT_EQ(rate(0.29).max_flips(100, 0), 29u);
  EXPECT_EQ(per_target(3).max_flips(1000, 7), 21u);
  EXPECT_THROW(rate(1.5).validate(), ConfigError);
  EXPECT_THROW(per_target(6).validate(), ConfigError);
  EXPECT_THROW(per_target(0).validate(), ConfigError);
}

TEST(Dice, FlipsMatchLabelsAndLowerHomophily) {
  auto d = sbm(300, 3);
  const double before = edge_homophily(d.graph);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = dice_attack(d.graph, d.graph.labels(), rate(0.2), seed);
    EXPECT_EQ(p.edge_flips.size(), floor_fraction(0.2, d.graph.num_edges()));
    EXPECT_NO_THROW(p.validate(d.graph));
    for (const auto& f : p.edge_flips) {
      const bool same = d.graph.labels()[f.u] == d.graph.labels()[f.v];
      EXPECT_EQ(same, f.kind == FlipKind::remove);
    }
    EXPECT_LT(edge_homophily(apply_perturbation(d.graph, p)), before);
    EXPECT_EQ(dice_attack(d.graph, d.graph.labels(), rate(0.2), seed), p);
  }
}

TEST(Dice, ZeroBudgetIsEmpty) {
  auto d = sbm(100, 1);
  EXPECT_TRUE(dice_attack(d.graph, d.graph.labels(), rate(0.0), 0).edge_flips.empty());
}

TEST(RandomFlips, CountDistinctValid) {
  auto d = sbm(200, 2);
  auto p = random_flip_attack(d.graph, rate(0.1), 5);
  EXPECT_EQ(p.edge_flips.size(), floor_fraction(0.1, d.graph.num_edges()));
  EXPECT_NO_THROW(p.validate(d.graph));
}

TEST(RandomRewire, FlipsTouchTargets) {
  auto d = sbm(300, 4);
  auto targets = select_targets(d.graph, d.split, 10, 0.5, 1);
  ASSERT_FALSE(targets.nodes.empty());
  for (NodeId t : targets.nodes) {
    EXPECT_GT(d.graph.degree(t), 10u);
    EXPECT_TRUE(std::binary_search(d.split.test.begin(), d.split.test.end(), t));
  }
  auto p = random_rewire_attack(d.graph, targets, per_target(3), 7);
  EXPECT_NO_THROW(p.validate(d.graph));
  std::set<NodeId> tset(targets.nodes.begin(), targets.nodes.end());
  for (const auto& f : p.edge_flips) EXPECT_TRUE(tset.count(f.u) || tset.count(f.v));
  EXPECT_THROW(select_targets(d.graph, d.split, 100000), ValidationError);
}

TEST(Targeted, MatchesExhaustiveSearchOnFiftyGraphs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = pbtest::targeted_case(seed);
    ASSERT_EQ(c.got.size(), 1u) << "seed " << seed;
    EXPECT_EQ((Edge{c.got[0].u, c.got[0].v}), c.want) << "seed " << seed << " target " << c.target;
    EXPECT_TRUE(pbtest::matches(c)) << "seed " << seed;
  }
}

TEST(Targeted, MarginsDecreaseAndMatchDenseRecompute) {
  auto d = sbm(200, 6);
  TargetedAttacker attacker(d.graph, d.features, d.split);
  const NodeId t = d.split.test.front();
  auto steps = attacker.attack(t, 5);
  ASSERT_EQ(steps.size(), 5u);
  std::vector<Edge> edges = d.graph.edges();
  double prev = attacker.margin(t, edges);
  for (const auto& s : steps) {
    const Edge e{s.flip.u, s.flip.v};
    auto it = std::find(edges.begin(), edges.end(), e);
    if (it != edges.end()) edges.erase(it);
    else edges.push_back(e);
    const double m = attacker.margin(t, edges);
    EXPECT_NEAR(m, s.margin, 1e-9);
    EXPECT_LE(m, prev + 1e-9);
    prev = m;
  }
}

TEST(MetaGradient, ObjectiveGradientMatchesFiniteDifferences) {
  const int n = 8;
  Rng rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  MetaGradientConfig cfg{.inner_steps = 15, .inner_lr = 0.2, .momentum = 0.9, .weight_decay = 5e-4};
  MetaObjective obj(x, 3, {0, 1, 2, 3}, {0, 1, 2, 0}, {4, 5, 6, 7}, {1, 2, 0, 1}, cfg);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::bernoulli_distribution coin(0.4);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = coin(rng);
  }
  Eigen::MatrixXd grad;
  obj.evaluate(a, &grad);
  ASSERT_EQ(grad.rows(), n);
  const double h = 1e-6;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXd ap = a, am = a;
      ap(i, j) += h;
      am(i, j) -= h;
      const double fd = (obj.loss(ap) - obj.loss(am)) / (2 * h);
      EXPECT_LE(std::abs(grad(i, j) - fd), 1e-4 * std::max(std::abs(fd), std::abs(grad(i, j))) + 1e-9)
          << "(" << i << "," << j << ") analytic " << grad(i, j) << " fd " << fd;
    }
  }
}

TEST(MetaGradient, BudgetDeterminismAndProtectedEdges) {
  auto d = sbm(120, 8);
  MetaGradientConfig cfg{.inner_steps = 20};
  auto p = meta_gradient_attack(d.graph, d.features, d.split, rate(0.05), 1, cfg);
  EXPECT_EQ(p.edge_flips.size(), floor_fraction(0.05, d.graph.num_edges()));
  EXPECT_NO_THROW(p.validate(d.graph));
  EXPECT_EQ(meta_gradient_attack(d.graph, d.features, d.split, rate(0.05), 1, cfg).edge_flips, p.edge_flips);
  std::set<NodeId> train(d.split.train.begin(), d.split.train.end());
  for (const auto& f : p.edge_flips) {
    if (f.kind != FlipKind::remove) continue;
    for (NodeId v : {f.u, f.v}) EXPECT_FALSE(train.count(v) && d.graph.degree(v) == 1);
  }
}

class TextAttacks : public ::testing::Test {
 protected:
  void SetUp() override {
    d_ = sbm(200, 9, 0.4);
    surrogate_ = std::make_unique<TextSurrogate>(
        TextSurrogate::train(d_.graph.texts(), d_.graph.labels(), d_.split.train, d_.vocab, d_.graph.num_classes()));
  }
  Data d_;
  std::unique_ptr<TextSurrogate> surrogate_;
};

TEST_F(TextAttacks, CharEditsStayWithinBudget) {
  const auto& texts = d_.graph.texts();
  for (int budget : {1, 3}) {
    auto res = char_attack(texts, d_.graph.labels(), *surrogate_, budget, 4);
    auto out = apply_text_edits(texts, res.edits);
    for (std::size_t v = 0; v < texts.size(); ++v) {
      EXPECT_LE(edit_distance(texts[v], out[v]), static_cast<std::size_t>(budget));
      const auto& trace = res.loss_traces[v];
      for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_GT(trace[k], trace[k - 1]);
    }
  }
}

TEST_F(TextAttacks, ZeroEditsLeaveTextsUnchanged) {
  const auto& texts = d_.graph.texts();
  EXPECT_TRUE(char_attack(texts, d_.graph.labels(), *surrogate_, 0, 1).edits.empty());
  EXPECT_TRUE(word_attack(texts, d_.graph.labels(), *surrogate_, d_.vocab, 0, 1).edits.empty());
  EXPECT_TRUE(random_char_attack(texts, 0, 1).edits.empty());
  auto p = textual_attack(d_.graph, d_.split, "char", edits(0), 1);
  EXPECT_EQ(apply_perturbation(d_.graph, p).texts(), texts);
}

TEST_F(TextAttacks, GreedyCharBeatsRandomChar) {
  const auto& texts = d_.graph.texts();
  const auto& y = d_.graph.labels();
  auto loss_gain = [&](const std::vector<TextEdit>& edits) {
    auto out = apply_text_edits(texts, edits);
    double gain = 0;
    for (std::size_t v = 0; v < texts.size(); ++v) gain += surrogate_->loss(out[v], y[v]) - surrogate_->loss(texts[v], y[v]);
    return gain;
  };
  const double greedy = loss_gain(char_attack(texts, y, *surrogate_, 2, 5).edits);
  const double random = loss_gain(random_char_attack(texts, 2, 5).edits);
  EXPECT_GT(greedy, 0.0);
  EXPECT_GE(greedy, random);
}

TEST_F(TextAttacks, WordAttackUsesFrequentTokens) {
  const auto& texts = d_.graph.texts();
  auto res = word_attack(texts, d_.graph.labels(), *surrogate_, d_.vocab, 2, 3, 10);
  std::set<std::string> top(d_.vocab.tokens().begin(), d_.vocab.tokens().begin() + 10);
  std::map<NodeId, int> per_node;
  for (const auto& e : res.edits) {
    EXPECT_EQ(e.op, "word");
    EXPECT_TRUE(top.count(e.payload)) << e.payload;
    EXPECT_LE(++per_node[e.node], 2);
  }
  EXPECT_FALSE(res.edits.empty());
}

TEST_F(TextAttacks, LabeledNodesNeverEdited) {
  for (const char* kind : {"char", "word", "random_char"}) {
    auto p = textual_attack(d_.graph, d_.split, kind, edits(2), 11);
    EXPECT_NO_THROW(p.validate(d_.graph));
    EXPECT_FALSE(p.text_edits.empty()) << kind;
    for (const auto& e : p.text_edits) {
      EXPECT_FALSE(std::binary_search(d_.split.train.begin(), d_.split.train.end(), e.node)) << kind;
    }
    EXPECT_EQ(textual_attack(d_.graph, d_.split, kind, edits(2), 11), p);
  }
  EXPECT_THROW(textual_attack(d_.graph, d_.split, "emoji", edits(1), 0), ConfigError);
}

TEST(Combined, DegenerateBudgetsReduceToOneSide) {
  auto d = sbm(150, 10);
  AttackSpec spec{.name = "combined", .budget = rate(0.1), .seed = 2, .meta = {.inner_steps = 10},
                  .structural = "dice", .textual = "word"};
  spec.budget.textual_edits_per_node = 0;
  AttackSpec dice = spec;
  dice.name = "dice";
  auto only_struct = combined_attack(d.graph, d.features, d.split, spec);
  EXPECT_EQ(only_struct.edge_flips, run_attack(d.graph, d.features, d.split, dice).edge_flips);
  EXPECT_TRUE(only_struct.text_edits.empty());
  EXPECT_EQ(only_struct.attack_name, "combined");

  spec.budget = edits(2);
  AttackSpec word = spec;
  word.name = "word";
  auto only_text = combined_attack(d.graph, d.features, d.split, spec);
  EXPECT_TRUE(only_text.edge_flips.empty());
  EXPECT_EQ(only_text.text_edits, run_attack(d.graph, d.features, d.split, word).text_edits);

  spec.budget = rate(0.1);
  spec.budget.textual_edits_per_node = 2;
  auto both = combined_attack(d.graph, d.features, d.split, spec);
  EXPECT_EQ(both.edge_flips, only_struct.edge_flips);
  EXPECT_EQ(both.text_edits, only_text.text_edits);
  EXPECT_NO_THROW(both.validate(d.graph));
}

TEST(Combined, SpecValidation) {
  auto spec = [](std::string name, BudgetSpec budget, std::string structural = "meta") {
    AttackSpec s;
    s.name = std::move(name);
    s.budget = budget;
    s.structural = std::move(structural);
    return s;
  };
  EXPECT_THROW(spec("nope", {}).validate(), ConfigError);
  EXPECT_THROW(spec("targeted", rate(0.1)).validate(), ConfigError);
  EXPECT_THROW(spec("meta", per_target(2)).validate(), ConfigError);
  EXPECT_THROW(spec("combined", rate(0.1), "word").validate(), ConfigError);
  EXPECT_NO_THROW(spec("combined", rate(0.1)).validate());
}

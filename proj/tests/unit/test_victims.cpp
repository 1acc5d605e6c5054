#include <cmath>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/sampling.hpp"
#include "poisonbench/tagraph/synthetic.hpp"
#include "poisonbench/victims/model.hpp"
#include "poisonbench/victims/network.hpp"
#include "poisonbench/victims/normalize.hpp"
#include "poisonbench/victims/serialize.hpp"
#include "poisonbench/victims/surrogate.hpp"

using namespace poisonbench;
using pbtest::TempDir;
using pbtest::Toy;
using pbtest::toy;

namespace {

Eigen::MatrixXd dense_adjacency(const TextAttributedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  return a;
}

template <typename S>
Eigen::MatrixXd to_dense(const SparseMatrix<S>& m) {
  return Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>(m).template cast<double>();
}

Toy small_sbm(std::uint64_t seed) {
  auto g = generate_synthetic_tag({.num_nodes = 300,
                                   .num_classes = 3,
                                   .intra_edge_prob = 0.05,
                                   .inter_edge_prob = 0.005,
                                   .vocab_size = 120,
                                   .words_per_node = 15,
                                   .class_word_skew = 0.3,
                                   .seed = seed});
  std::vector<std::string> texts = g.texts();
  auto vocab = build_vocab(texts, 1000, 1);
  auto split = split_nodes(g, 0.2, 0.1, seed);
  return {g, bow_embed(texts, vocab), split};
}

void expect_gradients(GnnKind kind, std::uint64_t seed) {
  const auto r = pbtest::gradient_check(kind, seed);
  for (const auto& m : r.mismatches) ADD_FAILURE() << m;
  EXPECT_GT(r.checked, 20u);
}

}  // namespace

TEST(Normalize, MatchesDenseFormula) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = pbtest::random_graph(15, 0.25, 2, seed);
    Eigen::MatrixXd a = dense_adjacency(g) + Eigen::MatrixXd::Identity(15, 15);
    Eigen::VectorXd d = a.rowwise().sum().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd want = d.asDiagonal() * a * d.asDiagonal();
    EXPECT_LT((to_dense(normalize_adjacency<double>(g)) - want).cwiseAbs().maxCoeff(), 1e-14);

    Eigen::MatrixXd adj = dense_adjacency(g);
    Eigen::MatrixXd mean = adj;
    for (Eigen::Index i = 0; i < 15; ++i) {
      const double deg = adj.row(i).sum();
      if (deg > 0) mean.row(i) /= deg;
    }
    EXPECT_LT((to_dense(mean_aggregation<double>(15, g.edges())) - mean).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Normalize, SpmmMatchesDenseProduct) {
  auto g = pbtest::random_graph(20, 0.2, 2, 3);
  auto a = normalize_adjacency<double>(g);
  Matrix<double> b = Matrix<double>::Random(20, 4);
  Eigen::MatrixXd da = to_dense(a);
  EXPECT_LT((spmm(a, b) - da * b).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((spmm_transposed(a, b) - da.transpose() * b).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Network, GradientCheckGcn) {
  for (std::uint64_t s = 1; s <= 3; ++s) expect_gradients(GnnKind::gcn, s);
}
TEST(Network, GradientCheckSage) {
  for (std::uint64_t s = 1; s <= 3; ++s) expect_gradients(GnnKind::sage, s);
}
TEST(Network, GradientCheckGat) {
  for (std::uint64_t s = 1; s <= 3; ++s) expect_gradients(GnnKind::gat, s);
}

TEST(Network, AttentionRowsSumToOne) {
  auto t = toy(4);
  GnnArch arch{.kind = GnnKind::gat, .hidden = 4, .heads_layer1 = 2};
  auto ops = GraphOperators<double>::build(GnnKind::gat, 10, t.graph.edges());
  FeatureInput<double> x(t.features.values);
  auto params = init_parameters<double>(arch, 6, 3, 4);
  auto [a1, a2] = gat_attention(arch, ops, x, params);
  ASSERT_EQ(a1.cols(), 2);
  for (std::size_t i = 0; i < 10; ++i) {
    for (Eigen::Index h = 0; h < a1.cols(); ++h) {
      double s = 0;
      for (std::size_t k = ops.attn_ptr[i]; k < ops.attn_ptr[i + 1]; ++k) s += a1(static_cast<Eigen::Index>(k), h);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Network, CrossEntropyHandValue) {
  Matrix<double> logits(2, 2);
  logits << 0.0, 0.0, 2.0, 0.0;
  std::vector<ClassId> labels = {1, 0};
  std::vector<NodeId> nodes = {0, 1};
  Matrix<double> d;
  const double l = cross_entropy(logits, labels, nodes, &d);
  EXPECT_NEAR(l, 0.5 * (std::log(2.0) + std::log(1 + std::exp(-2.0))), 1e-15);
  EXPECT_NEAR(d(0, 1), 0.5 * (0.5 - 1.0), 1e-15);
}

TEST(Arch, ValidateAndParse) {
  EXPECT_EQ(parse_gnn_kind("graphsage"), GnnKind::sage);
  EXPECT_THROW(parse_gnn_kind("mlp"), ConfigError);
  EXPECT_THROW((GnnArch{.layers = 3}.validate()), ConfigError);
  EXPECT_THROW((GnnArch{.kind = GnnKind::gat, .hidden = 10, .heads_layer1 = 8}.validate()), ConfigError);
  EXPECT_THROW((GnnArch{.dropout = 1.0}.validate()), ConfigError);
  EXPECT_THROW((TrainConfig{.epochs = 0}.validate()), ConfigError);
}

class Training : public ::testing::TestWithParam<GnnKind> {};

TEST_P(Training, LearnsDeterministicallyAndRoundTrips) {
  auto d = small_sbm(5);
  GnnArch arch{.kind = GetParam(), .hidden = 32, .heads_layer1 = 4};
  TrainConfig cfg{.learning_rate = 0.01, .epochs = 100, .seed = 3};
  auto m1 = train_gnn(arch, d.graph, d.features, d.split, cfg);
  auto m2 = train_gnn(arch, d.graph, d.features, d.split, cfg);
  ASSERT_EQ(m1.parameters.size(), m2.parameters.size());
  for (std::size_t i = 0; i < m1.parameters.size(); ++i) EXPECT_EQ(m1.parameters[i].value, m2.parameters[i].value);

  const double acc = evaluate_accuracy(m1, d.graph, d.features, d.split.test);
  EXPECT_GT(acc, 0.6) << "3 classes, chance is 0.33";

  auto pred = predict(m1, d.graph, d.features);
  StructurePredictor sp(m1, d.features);
  EXPECT_EQ(sp.classify(d.graph.edges()), pred.classes);
  for (Eigen::Index i = 0; i < pred.probabilities.rows(); ++i) {
    EXPECT_NEAR(pred.probabilities.row(i).sum(), 1.0, 1e-6);
  }

  TempDir dir;
  save_model(m1, dir.path());
  auto back = load_model(dir.path());
  EXPECT_EQ(back.arch, m1.arch);
  EXPECT_EQ(back.seed, m1.seed);
  ASSERT_EQ(back.parameters.size(), m1.parameters.size());
  for (std::size_t i = 0; i < m1.parameters.size(); ++i) {
    EXPECT_EQ(back.parameters[i].name, m1.parameters[i].name);
    EXPECT_EQ(back.parameters[i].value, m1.parameters[i].value);
  }
  EXPECT_EQ(predict(back, d.graph, d.features).classes, pred.classes);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, Training, ::testing::Values(GnnKind::gcn, GnnKind::gat, GnnKind::sage),
                         [](const auto& info) { return to_string(info.param); });

TEST(TrainingBasics, SeedChangesWeights) {
  auto d = small_sbm(6);
  GnnArch arch{.hidden = 16};
  auto a = train_gnn(arch, d.graph, d.features, d.split, {.epochs = 5, .seed = 1});
  auto b = train_gnn(arch, d.graph, d.features, d.split, {.epochs = 5, .seed = 2});
  EXPECT_NE(a.parameters[0].value, b.parameters[0].value);
}

TEST(TrainingBasics, ShapeMismatchRejected) {
  auto d = small_sbm(7);
  EmbeddingMatrix bad{Eigen::MatrixXd::Zero(3, 4), "x"};
  EXPECT_THROW(train_gnn({}, d.graph, bad, d.split, {}), ValidationError);
}

TEST(Surrogate, FitsLabeledNodesAndKeepsThem) {
  auto d = small_sbm(8);
  auto model = train_surrogate(d.graph, d.features, d.split.train);
  auto again = train_surrogate(d.graph, d.features, d.split.train);
  EXPECT_EQ(model.weight, again.weight);
  auto pred = surrogate_predict(model, d.graph, d.features);
  EXPECT_GT(accuracy_of(pred, d.graph.labels(), d.split.test), 0.6);
  auto gray = gray_box_labels(model, d.graph, d.features, d.split.train);
  for (NodeId v : d.split.train) EXPECT_EQ(gray[v], d.graph.labels()[v]);
  for (NodeId v : d.split.test) EXPECT_EQ(gray[v], pred[v]);
}

TEST(Serialize, MissingFilesRejected) {
  TempDir dir;
  EXPECT_THROW(load_model(dir.path()), Error);
}

#include "poisonbench/victims/surrogate.hpp"

#include <cmath>

#include "poisonbench/victims/model.hpp"
#include "poisonbench/victims/network.hpp"

namespace poisonbench {

Matrix<float> propagate_two_hop(const TextAttributedGraph& graph, const EmbeddingMatrix& features) {
  if (features.rows() != graph.num_nodes()) throw ValidationError("surrogate: feature rows differ from node count");
  const auto a = normalize_adjacency<float>(graph);
  const Matrix<float> x = features.values.cast<float>();
  const Matrix<float> ax = a * x;
  return a * ax;
}

SurrogateModel train_surrogate(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                               std::span<const NodeId> labeled_nodes, const SurrogateConfig& cfg) {
  if (labeled_nodes.empty()) throw ConfigError("train_surrogate: no labeled nodes");
  const Matrix<float> p = propagate_two_hop(graph, features);
  const auto c = graph.num_classes();
  const auto& labels = graph.labels();

  Matrix<float> pl(static_cast<Eigen::Index>(labeled_nodes.size()), p.cols());
  std::vector<ClassId> yl(labeled_nodes.size());
  std::vector<NodeId> rows(labeled_nodes.size());
  for (std::size_t i = 0; i < labeled_nodes.size(); ++i) {
    pl.row(static_cast<Eigen::Index>(i)) = p.row(labeled_nodes[i]);
    yl[i] = labels[labeled_nodes[i]];
    rows[i] = static_cast<NodeId>(i);
  }

  SurrogateModel model{Matrix<float>::Zero(p.cols(), c)};
  Matrix<float> m = Matrix<float>::Zero(p.cols(), c);
  Matrix<float> v = Matrix<float>::Zero(p.cols(), c);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const float wd = static_cast<float>(cfg.weight_decay);
  for (int step = 1; step <= cfg.epochs; ++step) {
    Matrix<float> d_logits;
    const float loss = cross_entropy<float>(pl * model.weight, yl, rows, &d_logits);
    if (!std::isfinite(loss)) throw DivergenceError(step, "surrogate loss is not finite");
    const Matrix<float> g = pl.transpose() * d_logits + wd * model.weight;
    m = static_cast<float>(beta1) * m + static_cast<float>(1 - beta1) * g;
    v = static_cast<float>(beta2) * v + static_cast<float>(1 - beta2) * g.cwiseProduct(g);
    const float c1 = static_cast<float>(1 - std::pow(beta1, step));
    const float c2 = static_cast<float>(1 - std::pow(beta2, step));
    model.weight.array() -=
        static_cast<float>(cfg.learning_rate) * (m.array() / c1) / ((v.array() / c2).sqrt() + static_cast<float>(eps));
  }
  return model;
}

Matrix<float> surrogate_logits(const SurrogateModel& model, const TextAttributedGraph& graph,
                               const EmbeddingMatrix& features) {
  return propagate_two_hop(graph, features) * model.weight;
}

std::vector<ClassId> surrogate_predict(const SurrogateModel& model, const TextAttributedGraph& graph,
                                       const EmbeddingMatrix& features) {
  const Matrix<float> logits = surrogate_logits(model, graph, features);
  std::vector<ClassId> out(graph.num_nodes());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_row(logits.row(i));
  return out;
}

std::vector<ClassId> gray_box_labels(const SurrogateModel& model, const TextAttributedGraph& graph,
                                     const EmbeddingMatrix& features, std::span<const NodeId> labeled_nodes) {
  auto out = surrogate_predict(model, graph, features);
  for (NodeId v : labeled_nodes) out[v] = graph.labels()[v];
  return out;
}

}  // namespace poisonbench

#pragma once

#include <span>

#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/graph.hpp"
#include "poisonbench/victims/arch.hpp"

namespace poisonbench {

/// Linearized two-layer GCN used by the structure attacks: logits = Â² X W.
struct SurrogateModel {
  Matrix<float> weight;  // d x C
};

struct SurrogateConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  double weight_decay = 5e-4;
};

/// Â² X in float.
Matrix<float> propagate_two_hop(const TextAttributedGraph& graph, const EmbeddingMatrix& features);

/// Fits W by Adam on the cross-entropy of Â² X W over `labeled_nodes`, reading labels
/// only at those nodes. Zero initialization, so the fit is deterministic.
SurrogateModel train_surrogate(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                               std::span<const NodeId> labeled_nodes, const SurrogateConfig& cfg = {});

Matrix<float> surrogate_logits(const SurrogateModel& model, const TextAttributedGraph& graph,
                               const EmbeddingMatrix& features);
std::vector<ClassId> surrogate_predict(const SurrogateModel& model, const TextAttributedGraph& graph,
                                       const EmbeddingMatrix& features);

/// Gray-box label view: true labels on `labeled_nodes`, surrogate predictions elsewhere.
std::vector<ClassId> gray_box_labels(const SurrogateModel& model, const TextAttributedGraph& graph,
                                     const EmbeddingMatrix& features, std::span<const NodeId> labeled_nodes);

}  // namespace poisonbench

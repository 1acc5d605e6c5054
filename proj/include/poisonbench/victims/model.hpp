#pragma once

#include <span>
#include <vector>

#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/graph.hpp"
#include "poisonbench/tagraph/sampling.hpp"
#include "poisonbench/victims/arch.hpp"
#include "poisonbench/victims/network.hpp"

namespace poisonbench {

/// Full-batch training with Adam (beta 0.9/0.999) on the train-node cross-entropy,
/// L2 weight decay added to the gradient, and early stopping on validation accuracy
/// (the best-validation weights are kept). Single-threaded and bitwise reproducible
/// for a fixed seed. Throws DivergenceError on a non-finite loss.
VictimModel train_gnn(const GnnArch& arch, const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                      const NodeSplit& split, const TrainConfig& cfg);

struct Prediction {
  std::vector<ClassId> classes;     // argmax, ties to the lowest class id
  Eigen::MatrixXd probabilities;    // softmax rows
};

/// Evaluation-mode (no dropout) prediction for every node.
Prediction predict(const VictimModel& model, const TextAttributedGraph& graph, const EmbeddingMatrix& features);

/// Fraction of `nodes` whose predicted class equals the graph label.
double evaluate_accuracy(const VictimModel& model, const TextAttributedGraph& graph,
                         const EmbeddingMatrix& features, std::span<const NodeId> nodes);

/// Fraction of `nodes` with predicted[v] == labels[v].
double accuracy_of(std::span<const ClassId> predicted, std::span<const ClassId> labels,
                   std::span<const NodeId> nodes);

/// Argmax with ties to the lowest column.
template <typename Derived>
ClassId argmax_row(const Eigen::MatrixBase<Derived>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return static_cast<ClassId>(best);
}

/// Predicts classes of a trained model over arbitrary edge sets with fixed features.
/// The feature-side transform of the first layer is computed once; classify() is const
/// and safe to call from several threads.
class StructurePredictor {
 public:
  StructurePredictor(const VictimModel& model, const EmbeddingMatrix& features);

  std::vector<ClassId> classify(std::span<const Edge> edges) const;
  std::size_t num_nodes() const noexcept { return num_nodes_; }

 private:
  const VictimModel* model_;
  std::size_t num_nodes_;
  Matrix<float> first_;
};

}  // namespace poisonbench

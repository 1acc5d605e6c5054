#pragma once

#include <vector>

#include <Eigen/Dense>

#include "poisonbench/attacks/perturbation.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/sampling.hpp"

namespace poisonbench {

/// Inner training of the linearized surrogate Â² X W: gradient descent with heavy-ball
/// momentum from W = 0, on the labeled cross-entropy plus weight_decay/2 ||W||^2.
struct MetaGradientConfig {
  int inner_steps = 100;
  double inner_lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

/// Attacker objective as a function of a dense adjacency matrix: train the surrogate on
/// the labeled nodes for inner_steps steps, then take the mean cross-entropy of the
/// unlabeled nodes against their pseudo-labels. The adjacency may be weighted or
/// asymmetric; self-loops are added internally and Â uses row degrees.
class MetaObjective {
 public:
  MetaObjective(Eigen::MatrixXd features, int num_classes, std::vector<NodeId> labeled,
                std::vector<ClassId> labeled_classes, std::vector<NodeId> unlabeled,
                std::vector<ClassId> pseudo_classes, MetaGradientConfig cfg = {});

  double loss(const Eigen::MatrixXd& adjacency) const { return evaluate(adjacency, nullptr); }
  /// Loss and d loss / d A_ij for every entry (written to `grad`, N x N).
  double evaluate(const Eigen::MatrixXd& adjacency, Eigen::MatrixXd* grad) const;

 private:
  Eigen::MatrixXd x_;
  int classes_;
  std::vector<NodeId> labeled_, unlabeled_;
  std::vector<ClassId> labeled_y_, pseudo_y_;
  MetaGradientConfig cfg_;
};

/// Greedy meta-gradient poisoning. Labels are read only on split.train; the other nodes
/// get pseudo-labels from a surrogate fit on the clean graph. Each step flips the
/// feasible pair with the largest score (grad_ij + grad_ji)(1 - 2 A_ij), lowest pair on
/// ties. Pairs are never flipped twice, and the only edge of a degree-1 labeled node is
/// never removed. Deterministic: `seed` is recorded but the procedure draws nothing.
PerturbationSet meta_gradient_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                     const NodeSplit& split, const BudgetSpec& budget, std::uint64_t seed,
                                     const MetaGradientConfig& cfg = {});

}  // namespace poisonbench

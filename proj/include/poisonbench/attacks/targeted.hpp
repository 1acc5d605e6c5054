#pragma once

#include <vector>

#include "poisonbench/attacks/perturbation.hpp"
#include "poisonbench/attacks/targets.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/sampling.hpp"
#include "poisonbench/victims/arch.hpp"

namespace poisonbench {

/// Greedy structure attack on single nodes against the linearized surrogate Â² X W
/// (fit on split.train). The attacked class of a target is its label when labeled,
/// otherwise the surrogate prediction on the clean graph.
class TargetedAttacker {
 public:
  TargetedAttacker(const TextAttributedGraph& graph, const EmbeddingMatrix& features, const NodeSplit& split);

  struct Step {
    EdgeFlip flip;  // relative to the clean graph
    double margin;  // target margin after the flip
  };

  /// Each step takes the candidate flip with the smallest resulting margin
  /// (logit of the attacked class minus the best other logit); near-ties within 1e-12
  /// go to the lowest pair. Candidates are unflipped pairs incident to the target or
  /// to one of its current neighbors. Stops early only when no candidate is left.
  std::vector<Step> attack(NodeId target, int budget) const;

  ClassId attacked_class(NodeId target) const { return target_class_[target]; }
  /// Surrogate margin of `target` over an arbitrary edge list (dense recompute).
  double margin(NodeId target, std::span<const Edge> edges) const;
  /// X W of the surrogate, N x C.
  const Matrix<double>& transformed() const noexcept { return h_; }

 private:
  const TextAttributedGraph* graph_;
  Matrix<double> h_;
  std::vector<ClassId> target_class_;
};

/// Union of independent per-target attacks on the clean graph, each with
/// budget.per_target flips. `seed` is recorded; the search itself is deterministic.
PerturbationSet targeted_gradient_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                         const NodeSplit& split, const TargetSet& targets, const BudgetSpec& budget,
                                         std::uint64_t seed);

}  // namespace poisonbench

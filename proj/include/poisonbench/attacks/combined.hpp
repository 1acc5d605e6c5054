#pragma once

#include <string>
#include <utility>

#include "poisonbench/attacks/meta_gradient.hpp"
#include "poisonbench/attacks/perturbation.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/sampling.hpp"

namespace poisonbench {

/// Everything needed to run one named attack.
///   structural: dice, random, meta, targeted, random_rewire
///   textual:    char, word, random_char
///   combined:   `structural` on the clean graph plus `textual` on the clean texts
struct AttackSpec {
  std::string name;
  BudgetSpec budget;
  std::uint64_t seed = 0;
  bool oracle_labels = false;         // dice: true labels everywhere instead of the gray-box view
  std::size_t target_min_degree = 10;
  double target_sample_rate = 1.0;
  std::uint64_t target_seed = 0;      // shared by targeted and random_rewire so they hit the same nodes
  int word_top_k = 50;
  MetaGradientConfig meta;
  std::string structural = "meta";    // combined only
  std::string textual = "word";       // combined only

  void validate() const;
};

bool is_structural_attack(const std::string& name);
bool is_textual_attack(const std::string& name);

/// Union of a structural and a textual set (independent perturbation of the two
/// modalities). Either part may be empty.
PerturbationSet combine_perturbations(const PerturbationSet& structural, const PerturbationSet& textual);

PerturbationSet run_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features, const NodeSplit& split,
                           const AttackSpec& spec);

/// Structural attack `spec.structural` and textual attack `spec.textual`, both on clean
/// inputs with the same budget spec and seed, merged into one set named "combined".
/// The two halves of a combined spec: the structural attack without textual budget
/// and the textual attack without structural budget.
std::pair<AttackSpec, AttackSpec> combined_parts(const AttackSpec& spec);
bool has_structural_budget(const BudgetSpec& budget);
/// Merges separately computed halves into the set combined_attack would return.
PerturbationSet assemble_combined(const AttackSpec& spec, const PerturbationSet& structural,
                                  const PerturbationSet& textual);

PerturbationSet combined_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                const NodeSplit& split, const AttackSpec& spec);

}  // namespace poisonbench

#include "poisonbench/attacks/combined.hpp"

#include <algorithm>

#include "poisonbench/attacks/dice.hpp"
#include "poisonbench/attacks/random_flips.hpp"
#include "poisonbench/attacks/targeted.hpp"
#include "poisonbench/attacks/targets.hpp"
#include "poisonbench/attacks/textual.hpp"
#include "poisonbench/victims/surrogate.hpp"

namespace poisonbench {

namespace {

constexpr std::string_view kStructural[] = {"dice", "random", "meta", "targeted", "random_rewire"};
constexpr std::string_view kTextual[] = {"char", "word", "random_char"};

bool is_per_target(const std::string& name) { return name == "targeted" || name == "random_rewire"; }

}  // namespace

bool is_structural_attack(const std::string& name) {
  return std::find(std::begin(kStructural), std::end(kStructural), name) != std::end(kStructural);
}

bool is_textual_attack(const std::string& name) {
  return std::find(std::begin(kTextual), std::end(kTextual), name) != std::end(kTextual);
}

void AttackSpec::validate() const {
  budget.validate();
  if (name == "combined") {
    if (!is_structural_attack(structural)) throw ConfigError("attack: unknown structural part '" + structural + "'");
    if (!is_textual_attack(textual)) throw ConfigError("attack: unknown textual part '" + textual + "'");
  } else if (!is_structural_attack(name) && !is_textual_attack(name)) {
    throw ConfigError("attack: unknown attack '" + name + "'");
  }
  const std::string& s = name == "combined" ? structural : name;
  if (is_structural_attack(s)) {
    const auto want = is_per_target(s) ? StructuralMode::per_target : StructuralMode::global_rate;
    if (budget.structural_mode != want) {
      throw ConfigError("attack: " + s + " needs a " + to_string(want) + " budget");
    }
  }
  if (word_top_k < 1) throw ConfigError("attack: word_top_k must be positive");
}

PerturbationSet combine_perturbations(const PerturbationSet& structural, const PerturbationSet& textual) {
  PerturbationSet out;
  out.attack_name = "combined";
  out.seed = structural.seed;
  out.budget = structural.budget;
  out.budget.textual_edits_per_node = textual.budget.textual_edits_per_node;
  out.targets = structural.targets;
  out.edge_flips = structural.edge_flips;
  out.text_edits = textual.text_edits;
  out.warnings = structural.warnings;
  out.warnings.insert(out.warnings.end(), textual.warnings.begin(), textual.warnings.end());
  return out;
}

PerturbationSet run_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features, const NodeSplit& split,
                           const AttackSpec& spec) {
  spec.validate();
  const std::string& name = spec.name;
  if (name == "combined") return combined_attack(graph, features, split, spec);
  if (is_textual_attack(name)) return textual_attack(graph, split, name, spec.budget, spec.seed, spec.word_top_k);
  if (name == "dice") {
    if (spec.oracle_labels) return dice_attack(graph, graph.labels(), spec.budget, spec.seed);
    const auto surrogate = train_surrogate(graph, features, split.train);
    const auto labels = gray_box_labels(surrogate, graph, features, split.train);
    return dice_attack(graph, labels, spec.budget, spec.seed);
  }
  if (name == "random") return random_flip_attack(graph, spec.budget, spec.seed);
  if (name == "meta") return meta_gradient_attack(graph, features, split, spec.budget, spec.seed, spec.meta);
  const auto targets = select_targets(graph, split, spec.target_min_degree, spec.target_sample_rate, spec.target_seed);
  if (name == "targeted") return targeted_gradient_attack(graph, features, split, targets, spec.budget, spec.seed);
  return random_rewire_attack(graph, targets, spec.budget, spec.seed);
}

std::pair<AttackSpec, AttackSpec> combined_parts(const AttackSpec& spec) {
  AttackSpec s = spec;
  s.name = spec.structural;
  s.budget.textual_edits_per_node = 0;
  AttackSpec t = spec;
  t.name = spec.textual;
  t.budget.structural_mode = StructuralMode::global_rate;
  t.budget.global_rate = 0.0;
  return {s, t};
}

bool has_structural_budget(const BudgetSpec& budget) {
  return budget.structural_mode == StructuralMode::per_target || budget.global_rate > 0;
}

PerturbationSet assemble_combined(const AttackSpec& spec, const PerturbationSet& structural,
                                  const PerturbationSet& textual) {
  PerturbationSet out = combine_perturbations(structural, textual);
  out.seed = spec.seed;
  out.budget = spec.budget;
  return out;
}

PerturbationSet combined_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                const NodeSplit& split, const AttackSpec& spec) {
  spec.validate();
  const auto [s, t] = combined_parts(spec);
  // a zero budget on either side degenerates to the other attack alone
  const PerturbationSet structural = has_structural_budget(spec.budget) ? run_attack(graph, features, split, s) : PerturbationSet{};
  const PerturbationSet textual =
      spec.budget.textual_edits_per_node > 0 ? run_attack(graph, features, split, t) : PerturbationSet{};
  return assemble_combined(spec, structural, textual);
}

}  // namespace poisonbench

#pragma once

#include <span>
#include <string>
#include <vector>

#include "poisonbench/attacks/perturbation.hpp"
#include "poisonbench/attacks/text_surrogate.hpp"
#include "poisonbench/tagraph/sampling.hpp"

namespace poisonbench {

struct TextAttackResult {
  std::vector<TextEdit> edits;
  std::vector<std::vector<double>> loss_traces;  // per node: surrogate loss before and after each edit
  std::vector<std::string> notes;
};

/// Greedy typo attack. Per node, tokens are ranked by leave-one-out importance (loss
/// increase when the token is dropped, ties by position); the most important tokens of
/// length >= 3 each get at most one character operation (swap adjacent, substitute,
/// delete, insert a lowercase letter) chosen to maximize the surrogate loss and kept
/// only if the loss strictly increases, until `edits_per_node` edits are applied.
/// Equal-loss candidates are chosen between by the seeded stream of the node.
TextAttackResult char_attack(std::span<const std::string> texts, std::span<const ClassId> labels,
                             const TextSurrogate& surrogate, int edits_per_node, std::uint64_t seed);

/// Same ranking, but each chosen token is replaced by the most damaging of the `top_k`
/// most frequent vocabulary tokens.
TextAttackResult word_attack(std::span<const std::string> texts, std::span<const ClassId> labels,
                             const TextSurrogate& surrogate, const Vocabulary& vocab, int edits_per_node,
                             std::uint64_t seed, int top_k = 50);

/// Baseline: random character operations on randomly chosen tokens of length >= 3,
/// one per token.
TextAttackResult random_char_attack(std::span<const std::string> texts, int edits_per_node, std::uint64_t seed);

/// Gray-box labels for text attacks: truth on `labeled`, surrogate predictions elsewhere.
std::vector<ClassId> text_attack_labels(std::span<const std::string> texts, std::span<const ClassId> truth,
                                        std::span<const NodeId> labeled, const TextSurrogate& surrogate);

/// `kind` is char, word or random_char. Fits the text surrogate on split.train over a
/// vocabulary of the clean texts and attacks every node outside split.train. Edits on
/// the labeled nodes would be conditioned on their true labels, which hands the victim
/// a clean class signal instead of hiding one.
PerturbationSet textual_attack(const TextAttributedGraph& graph, const NodeSplit& split, const std::string& kind,
                               const BudgetSpec& budget, std::uint64_t seed, int top_k = 50);

}  // namespace poisonbench

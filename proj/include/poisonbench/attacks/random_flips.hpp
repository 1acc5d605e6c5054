#pragma once

#include "poisonbench/attacks/perturbation.hpp"
#include "poisonbench/attacks/targets.hpp"

namespace poisonbench {

/// floor(rate * |E|) distinct node pairs drawn uniformly; each flips its current state.
PerturbationSet random_flip_attack(const TextAttributedGraph& graph, const BudgetSpec& budget, std::uint64_t seed);

/// Per-target baseline: for each target, per_target flips incident to it, alternating
/// removal of a random existing edge and addition of a random absent pair (falling back
/// to the other move when one is impossible). Union over targets; the stream of
/// target t is seeded with seed + t.
PerturbationSet random_rewire_attack(const TextAttributedGraph& graph, const TargetSet& targets,
                                     const BudgetSpec& budget, std::uint64_t seed);

}  // namespace poisonbench

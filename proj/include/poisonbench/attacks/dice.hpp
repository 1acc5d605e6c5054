#pragma once

#include <span>

#include "poisonbench/attacks/perturbation.hpp"

namespace poisonbench {

/// DICE under a global-rate budget: floor(rate * |E|) flips, each a coin toss between
/// removing a uniformly chosen intra-class edge and adding a uniformly chosen absent
/// inter-class pair, with `labels` deciding class membership. When one pool is empty
/// the other move is used; when both are, a partial-budget warning is recorded.
PerturbationSet dice_attack(const TextAttributedGraph& graph, std::span<const ClassId> labels,
                            const BudgetSpec& budget, std::uint64_t seed);

}  // namespace poisonbench

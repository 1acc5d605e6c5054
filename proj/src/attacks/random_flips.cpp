#include "poisonbench/attacks/random_flips.hpp"

#include <algorithm>
#include <set>

namespace poisonbench {

PerturbationSet random_flip_attack(const TextAttributedGraph& graph, const BudgetSpec& budget, std::uint64_t seed) {
  budget.validate();
  if (budget.structural_mode != StructuralMode::global_rate) throw ConfigError("random: needs a global_rate budget");
  const std::size_t n = graph.num_nodes();
  PerturbationSet out;
  out.attack_name = "random";
  out.seed = seed;
  out.budget = budget;
  std::size_t flips = budget.max_flips(graph.num_edges(), 0);
  const std::size_t all_pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
  if (flips > all_pairs) {
    out.warnings.push_back("random: budget exceeds the number of node pairs");
    flips = all_pairs;
  }
  Rng rng(seed);
  std::uniform_int_distribution<NodeId> node(0, n > 0 ? static_cast<NodeId>(n - 1) : 0);
  std::set<Edge> used;
  while (out.edge_flips.size() < flips) {
    const NodeId a = node(rng);
    const NodeId b = node(rng);
    if (a == b) continue;
    const Edge e = Edge::canonical(a, b);
    if (!used.insert(e).second) continue;
    out.edge_flips.push_back(toggle(graph, e.u, e.v));
  }
  return out;
}

PerturbationSet random_rewire_attack(const TextAttributedGraph& graph, const TargetSet& targets,
                                     const BudgetSpec& budget, std::uint64_t seed) {
  budget.validate();
  if (budget.structural_mode != StructuralMode::per_target) {
    throw ConfigError("random_rewire: needs a per_target budget");
  }
  const std::size_t n = graph.num_nodes();
  PerturbationSet out;
  out.attack_name = "random_rewire";
  out.seed = seed;
  out.budget = budget;
  out.targets = targets.nodes;
  std::set<Edge> used;
  for (NodeId t : targets.nodes) {
    Rng rng(seed + t);
    std::vector<NodeId> present(graph.neighbors(t).begin(), graph.neighbors(t).end());
    std::vector<NodeId> absent;
    for (NodeId v = 0; v < n; ++v) {
      if (v != t && !graph.has_edge(t, v)) absent.push_back(v);
    }
    int done = 0;
    for (int step = 0; done < budget.per_target; ++step) {
      // drop partners whose pair another target already flipped
      auto taken = [&](NodeId v) { return used.count(Edge::canonical(t, v)) > 0; };
      std::erase_if(present, taken);
      std::erase_if(absent, taken);
      const bool want_removal = step % 2 == 0;
      std::vector<NodeId>* pool = nullptr;
      if (want_removal) pool = !present.empty() ? &present : (!absent.empty() ? &absent : nullptr);
      else pool = !absent.empty() ? &absent : (!present.empty() ? &present : nullptr);
      if (!pool) {
        out.warnings.push_back("random_rewire: target " + std::to_string(t) + " ran out of candidate pairs");
        break;
      }
      std::uniform_int_distribution<std::size_t> pick(0, pool->size() - 1);
      const std::size_t k = pick(rng);
      const NodeId v = (*pool)[k];
      (*pool)[k] = pool->back();
      pool->pop_back();
      const Edge e = Edge::canonical(t, v);
      used.insert(e);
      out.edge_flips.push_back(toggle(graph, e.u, e.v));
      ++done;
    }
  }
  return out;
}

}  // namespace poisonbench

#include "poisonbench/attacks/dice.hpp"

#include <algorithm>
#include <unordered_set>

namespace poisonbench {

namespace {

std::uint64_t pair_key(NodeId u, NodeId v) { return (static_cast<std::uint64_t>(u) << 32) | v; }

}  // namespace

PerturbationSet dice_attack(const TextAttributedGraph& graph, std::span<const ClassId> labels,
                            const BudgetSpec& budget, std::uint64_t seed) {
  budget.validate();
  if (budget.structural_mode != StructuralMode::global_rate) throw ConfigError("dice: needs a global_rate budget");
  const std::size_t n = graph.num_nodes();
  if (labels.size() != n) throw ValidationError("dice: label count does not match the graph");

  PerturbationSet out;
  out.attack_name = "dice";
  out.seed = seed;
  out.budget = budget;
  const std::size_t flips = budget.max_flips(graph.num_edges(), 0);

  std::vector<Edge> intra;
  std::size_t inter_edges = 0;
  for (const Edge& e : graph.edges()) {
    if (labels[e.u] == labels[e.v]) intra.push_back(e);
    else ++inter_edges;
  }
  std::vector<std::size_t> class_size;
  for (ClassId c : labels) {
    if (c < 0) throw ValidationError("dice: negative label");
    if (static_cast<std::size_t>(c) >= class_size.size()) class_size.resize(static_cast<std::size_t>(c) + 1, 0);
    ++class_size[static_cast<std::size_t>(c)];
  }
  std::size_t same_pairs = 0;
  for (std::size_t s : class_size) same_pairs += s * (s - (s > 0 ? 1 : 0)) / 2;
  const std::size_t all_pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
  std::size_t inter_absent = all_pairs - same_pairs - inter_edges;

  Rng rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<NodeId> node(0, n > 0 ? static_cast<NodeId>(n - 1) : 0);
  std::unordered_set<std::uint64_t> added;

  auto draw_addition = [&]() -> Edge {
    // rejection sampling is uniform over the absent inter-class pairs; fall back to
    // enumeration once the pool is sparse enough that rejections pile up
    for (int attempt = 0; attempt < 256; ++attempt) {
      const NodeId a = node(rng);
      const NodeId b = node(rng);
      if (a == b || labels[a] == labels[b]) continue;
      const Edge e = Edge::canonical(a, b);
      if (graph.has_edge(e.u, e.v) || added.count(pair_key(e.u, e.v))) continue;
      return e;
    }
    std::vector<Edge> pool;
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = a + 1; b < n; ++b) {
        if (labels[a] != labels[b] && !graph.has_edge(a, b) && !added.count(pair_key(a, b))) pool.push_back({a, b});
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
  };

  for (std::size_t i = 0; i < flips; ++i) {
    const bool want_removal = coin(rng) == 0;
    const bool can_remove = !intra.empty();
    const bool can_add = inter_absent > 0;
    if (!can_remove && !can_add) {
      out.warnings.push_back("dice: both move pools exhausted after " + std::to_string(i) + " of " +
                             std::to_string(flips) + " flips");
      break;
    }
    if ((want_removal && can_remove) || !can_add) {
      std::uniform_int_distribution<std::size_t> pick(0, intra.size() - 1);
      const std::size_t k = pick(rng);
      out.edge_flips.push_back({intra[k].u, intra[k].v, FlipKind::remove});
      intra[k] = intra.back();
      intra.pop_back();
    } else {
      const Edge e = draw_addition();
      added.insert(pair_key(e.u, e.v));
      --inter_absent;
      out.edge_flips.push_back({e.u, e.v, FlipKind::add});
    }
  }
  return out;
}

}  // namespace poisonbench

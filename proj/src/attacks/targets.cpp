#include "poisonbench/attacks/targets.hpp"

#include <algorithm>

namespace poisonbench {

TargetSet select_targets(const TextAttributedGraph& graph, const NodeSplit& split, std::size_t min_degree,
                         double sample_rate, std::uint64_t seed) {
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) throw ConfigError("select_targets: sample_rate must lie in (0, 1]");
  split.validate(graph.num_nodes());
  std::vector<NodeId> pool;
  for (NodeId v : split.test) {
    if (graph.degree(v) > min_degree) pool.push_back(v);
  }
  if (pool.empty()) {
    throw ValidationError("select_targets: no test node has degree > " + std::to_string(min_degree));
  }
  const std::size_t count = floor_fraction(sample_rate, pool.size());
  if (count == 0) throw ValidationError("select_targets: sample rate leaves no target");
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return {pool, min_degree, sample_rate, seed};
}

}  // namespace poisonbench

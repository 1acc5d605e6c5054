#pragma once

#include <cstdint>
#include <vector>

#include "poisonbench/tagraph/graph.hpp"
#include "poisonbench/tagraph/sampling.hpp"

namespace poisonbench {

struct TargetSet {
  std::vector<NodeId> nodes;  // sorted
  std::size_t min_degree = 10;
  double sample_rate = 1.0;
  std::uint64_t seed = 0;
};

/// Test nodes with degree > min_degree, subsampled uniformly to floor(rate * count)
/// nodes. Throws ValidationError when nothing qualifies or the sample is empty.
TargetSet select_targets(const TextAttributedGraph& graph, const NodeSplit& split, std::size_t min_degree = 10,
                         double sample_rate = 1.0, std::uint64_t seed = 0);

}  // namespace poisonbench

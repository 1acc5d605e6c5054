#pragma once

#include <vector>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

/// Train/validation/test partition. Each list is sorted and the three are disjoint.
struct NodeSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  /// Throws ValidationError unless the lists are disjoint, in range and train is nonempty.
  void validate(std::size_t num_nodes) const;
  bool operator==(const NodeSplit&) const = default;
};

/// Seeded uniform partition: floor(train_frac*N) train, floor(val_frac*N) val, rest test.
NodeSplit split_nodes(const TextAttributedGraph& graph, double train_frac, double val_frac, std::uint64_t seed);

/// Neighborhood-sampled induced subgraph.
///
/// Picks `seed_nodes` distinct seeds uniformly, then for `hops` rounds samples up to
/// `fanout` neighbors (without replacement) of every node reached in the previous round.
/// The result is the subgraph induced on all reached nodes, reindexed densely in the
/// original id order.
TextAttributedGraph sample_subset(const TextAttributedGraph& graph, std::size_t seed_nodes, std::size_t fanout,
                                  std::size_t hops, std::uint64_t seed);

/// Subgraph induced on `nodes` (any order, no duplicates), reindexed by ascending original id.
TextAttributedGraph induced_subgraph(const TextAttributedGraph& graph, std::vector<NodeId> nodes);

}  // namespace poisonbench

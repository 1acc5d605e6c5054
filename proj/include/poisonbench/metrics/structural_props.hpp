#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

/// Per-node local structure.
struct StructuralProps {
  std::vector<double> degree;
  std::vector<double> clustering;            // triangles / possible pairs, 0 below degree 2
  std::vector<double> pagerank;              // damping 0.85, sums to 1
  std::vector<double> avg_neighbor_degree;   // 0 for isolated nodes

  static constexpr std::array<std::string_view, 4> kNames = {"degree", "clustering", "pagerank",
                                                             "avg_neighbor_degree"};
  const std::vector<double>& get(std::size_t index) const;
};

/// PageRank runs power iteration until the L1 change drops below 1e-10; dangling
/// nodes spread their mass uniformly.
StructuralProps structural_properties(const TextAttributedGraph& graph);

}  // namespace poisonbench

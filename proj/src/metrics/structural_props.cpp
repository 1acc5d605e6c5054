#include "poisonbench/metrics/structural_props.hpp"

#include <algorithm>
#include <cmath>

namespace poisonbench {

const std::vector<double>& StructuralProps::get(std::size_t index) const {
  switch (index) {
    case 0: return degree;
    case 1: return clustering;
    case 2: return pagerank;
    case 3: return avg_neighbor_degree;
    default: throw ConfigError("structural property index out of range");
  }
}

StructuralProps structural_properties(const TextAttributedGraph& graph) {
  const std::size_t n = graph.num_nodes();
  StructuralProps p;
  p.degree.resize(n);
  p.clustering.assign(n, 0.0);
  p.avg_neighbor_degree.assign(n, 0.0);
  for (NodeId u = 0; u < n; ++u) p.degree[u] = static_cast<double>(graph.degree(u));

  for (NodeId u = 0; u < n; ++u) {
    const auto nu = graph.neighbors(u);
    if (nu.empty()) continue;
    double sum = 0.0;
    for (NodeId v : nu) sum += p.degree[v];
    p.avg_neighbor_degree[u] = sum / static_cast<double>(nu.size());
    if (nu.size() < 2) continue;
    // each triangle through u is seen once per ordered pair of its other corners
    std::size_t links = 0;
    for (NodeId v : nu) {
      const auto nv = graph.neighbors(v);
      auto a = nu.begin();
      auto b = nv.begin();
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else { ++links; ++a; ++b; }
      }
    }
    const double k = static_cast<double>(nu.size());
    p.clustering[u] = static_cast<double>(links) / (k * (k - 1.0));
  }

  constexpr double kDamping = 0.85;
  constexpr double kTolerance = 1e-10;
  constexpr int kMaxIterations = 10000;
  if (n == 0) return p;
  const double uniform = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, uniform);
  std::vector<double> next(n);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      if (graph.degree(u) == 0) dangling += rank[u];
    }
    std::fill(next.begin(), next.end(), (1.0 - kDamping) * uniform + kDamping * dangling * uniform);
    for (NodeId u = 0; u < n; ++u) {
      const auto nu = graph.neighbors(u);
      if (nu.empty()) continue;
      const double share = kDamping * rank[u] / static_cast<double>(nu.size());
      for (NodeId v : nu) next[v] += share;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - rank[i]);
    rank.swap(next);
    if (change < kTolerance) break;
  }
  double total = 0.0;
  for (double r : rank) total += r;
  for (double& r : rank) r /= total;
  p.pagerank = std::move(rank);
  return p;
}

}  // namespace poisonbench

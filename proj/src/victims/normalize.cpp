#include "poisonbench/victims/normalize.hpp"

#include <cmath>
#include <vector>

namespace poisonbench {

template <typename S>
SparseMatrix<S> normalize_adjacency(std::size_t num_nodes, std::span<const Edge> edges) {
  std::vector<S> degree(num_nodes, S(1));
  for (const Edge& e : edges) {
    degree[e.u] += 1;
    degree[e.v] += 1;
  }
  std::vector<S> inv_sqrt(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) inv_sqrt[i] = S(1) / std::sqrt(degree[i]);

  std::vector<Eigen::Triplet<S>> triplets;
  triplets.reserve(num_nodes + 2 * edges.size());
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    triplets.emplace_back(k, k, inv_sqrt[i] * inv_sqrt[i]);
  }
  for (const Edge& e : edges) {
    const S w = inv_sqrt[e.u] * inv_sqrt[e.v];
    triplets.emplace_back(e.u, e.v, w);
    triplets.emplace_back(e.v, e.u, w);
  }
  const auto n = static_cast<Eigen::Index>(num_nodes);
  SparseMatrix<S> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

template <typename S>
SparseMatrix<S> mean_aggregation(std::size_t num_nodes, std::span<const Edge> edges) {
  std::vector<S> degree(num_nodes, S(0));
  for (const Edge& e : edges) {
    degree[e.u] += 1;
    degree[e.v] += 1;
  }
  std::vector<Eigen::Triplet<S>> triplets;
  triplets.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    triplets.emplace_back(e.u, e.v, S(1) / degree[e.u]);
    triplets.emplace_back(e.v, e.u, S(1) / degree[e.v]);
  }
  const auto n = static_cast<Eigen::Index>(num_nodes);
  SparseMatrix<S> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

template SparseMatrix<float> normalize_adjacency<float>(std::size_t, std::span<const Edge>);
template SparseMatrix<double> normalize_adjacency<double>(std::size_t, std::span<const Edge>);
template SparseMatrix<float> mean_aggregation<float>(std::size_t, std::span<const Edge>);
template SparseMatrix<double> mean_aggregation<double>(std::size_t, std::span<const Edge>);

}  // namespace poisonbench

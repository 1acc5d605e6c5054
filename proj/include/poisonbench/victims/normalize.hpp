#pragma once

#include <span>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

template <typename S>
using SparseMatrix = Eigen::SparseMatrix<S, Eigen::RowMajor>;

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
template <typename S>
SparseMatrix<S> normalize_adjacency(std::size_t num_nodes, std::span<const Edge> edges);

template <typename S>
SparseMatrix<S> normalize_adjacency(const TextAttributedGraph& graph) {
  return normalize_adjacency<S>(graph.num_nodes(), graph.edges());
}

/// a * b for row-major sparse `a` and a dense `b` with contiguous rows.
template <typename S, typename Derived>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spmm(const SparseMatrix<S>& a,
                                                                       const Eigen::MatrixBase<Derived>& b) {
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out =
      Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    for (typename SparseMatrix<S>::InnerIterator it(a, i); it; ++it) out.row(i).noalias() += it.value() * b.row(it.col());
  }
  return out;
}

/// a^T * b for row-major sparse `a`.
template <typename S, typename Derived>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spmm_transposed(const SparseMatrix<S>& a,
                                                                                  const Eigen::MatrixBase<Derived>& b) {
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out =
      Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    for (typename SparseMatrix<S>::InnerIterator it(a, i); it; ++it) out.row(it.col()).noalias() += it.value() * b.row(i);
  }
  return out;
}

/// Row-normalized adjacency D^-1 A without self-loops; isolated rows are zero.
template <typename S>
SparseMatrix<S> mean_aggregation(std::size_t num_nodes, std::span<const Edge> edges);

}  // namespace poisonbench

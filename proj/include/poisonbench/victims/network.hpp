#pragma once

// Forward and reverse passes of the two-layer victims. Templated on the scalar so
// the same code trains in float and runs gradient checks in double; float and
// double are instantiated in network.cpp.

#include <optional>
#include <span>
#include <vector>

#include "poisonbench/victims/arch.hpp"
#include "poisonbench/victims/normalize.hpp"

namespace poisonbench {

/// Structure-dependent operators for one graph.
template <typename S>
struct GraphOperators {
  std::size_t num_nodes = 0;
  SparseMatrix<S> gcn;         // normalized adjacency with self-loops (gcn)
  SparseMatrix<S> mean;        // row-normalized adjacency (sage)
  std::vector<std::size_t> attn_ptr;  // CSR over neighbors plus self (gat)
  std::vector<NodeId> attn_col;

  static GraphOperators build(GnnKind kind, std::size_t num_nodes, std::span<const Edge> edges);
};

/// Node features, held sparse when most entries are zero.
template <typename S>
class FeatureInput {
 public:
  explicit FeatureInput(const Eigen::MatrixXd& values);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  Matrix<S> times(const Matrix<S>& w) const;            // X W
  Matrix<S> transpose_times(const Matrix<S>& g) const;  // X^T G

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  bool sparse_ = false;
  Matrix<S> dense_;
  SparseMatrix<S> sp_;
};

template <typename S>
ParameterList<S> init_parameters(const GnnArch& arch, std::size_t input_dim, int num_classes, std::uint64_t seed);

/// Intermediates kept by forward() for backward().
template <typename S>
struct ForwardCache {
  Matrix<S> t1;         // first-layer feature transform
  Matrix<S> a1;         // first-layer pre-activation
  Matrix<S> h;          // activation after dropout
  Matrix<S> mask;       // dropout mask (empty in eval mode)
  Matrix<S> t2;
  Matrix<S> alpha1, pre1, alpha2, pre2;  // attention (gat only), one column per head
};

/// Input-side linear transform of layer 1. Depends only on the features and weights,
/// so callers that vary only the structure can compute it once.
template <typename S>
Matrix<S> first_transform(const GnnArch& arch, const FeatureInput<S>& x, const ParameterList<S>& params);

/// Logits from a precomputed first_transform. `rng` enables dropout (training mode).
template <typename S>
Matrix<S> forward_from_transform(const GnnArch& arch, const GraphOperators<S>& ops, Matrix<S> t1,
                                 const ParameterList<S>& params, Rng* rng, ForwardCache<S>* cache);

template <typename S>
Matrix<S> forward(const GnnArch& arch, const GraphOperators<S>& ops, const FeatureInput<S>& x,
                  const ParameterList<S>& params, Rng* rng, ForwardCache<S>* cache) {
  return forward_from_transform(arch, ops, first_transform(arch, x, params), params, rng, cache);
}

/// Accumulates parameter gradients of a loss with upstream gradient `d_logits`.
template <typename S>
void backward(const GnnArch& arch, const GraphOperators<S>& ops, const FeatureInput<S>& x,
              const ParameterList<S>& params, const ForwardCache<S>& cache, const Matrix<S>& d_logits,
              ParameterList<S>& grads);

/// Mean cross-entropy over `nodes`; writes d loss / d logits when `d_logits` is given.
template <typename S>
S cross_entropy(const Matrix<S>& logits, std::span<const ClassId> labels, std::span<const NodeId> nodes,
                Matrix<S>* d_logits);

/// Deterministic (no dropout) training objective: mean cross-entropy on `nodes`
/// plus weight_decay/2 * ||params||^2. Fills `grads` when given.
template <typename S>
S loss_and_gradient(const GnnArch& arch, const GraphOperators<S>& ops, const FeatureInput<S>& x,
                    std::span<const ClassId> labels, std::span<const NodeId> nodes, const ParameterList<S>& params,
                    double weight_decay, ParameterList<S>* grads);

/// Row-wise softmax.
template <typename S>
Matrix<S> softmax_rows(const Matrix<S>& logits);

/// Attention coefficients per layer: rows follow GraphOperators::attn_col, one column per head.
template <typename S>
std::pair<Matrix<S>, Matrix<S>> gat_attention(const GnnArch& arch, const GraphOperators<S>& ops,
                                              const FeatureInput<S>& x, const ParameterList<S>& params);

template <typename S>
ParameterList<S> zeros_like(const ParameterList<S>& params);

template <typename S, typename T>
ParameterList<T> cast_parameters(const ParameterList<S>& params) {
  ParameterList<T> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back({p.name, p.value.template cast<T>()});
  return out;
}

}  // namespace poisonbench

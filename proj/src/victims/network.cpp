#include "poisonbench/victims/network.hpp"

#include <cmath>

namespace poisonbench {

namespace {

constexpr double kLeakySlope = 0.2;

// Parameter slots per architecture.
namespace gcn_slot { enum { w1, b1, w2, b2 }; }
namespace sage_slot { enum { w1_self, w1_neigh, b1, w2_self, w2_neigh, b2 }; }
namespace gat_slot { enum { w1, att_src1, att_dst1, b1, w2, att_src2, att_dst2, b2 }; }

template <typename S>
Matrix<S> glorot(Eigen::Index rows, Eigen::Index cols, double fan, Rng& rng) {
  const double limit = std::sqrt(6.0 / fan);
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix<S> m(rows, cols);
  // fill row by row so the draw order does not depend on storage order
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<S>(dist(rng));
  return m;
}

template <typename S>
void add_bias(Matrix<S>& m, const Matrix<S>& bias) {
  m.rowwise() += bias.row(0);
}

template <typename S>
Matrix<S> column_sums(const Matrix<S>& m) {
  return m.colwise().sum();
}

template <typename S>
Matrix<S> hcat(const Matrix<S>& a, const Matrix<S>& b) {
  Matrix<S> out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

// Attention aggregation over neighbors plus self. `t` holds `heads` column blocks.
template <typename S>
Matrix<S> gat_aggregate(const GraphOperators<S>& ops, const Matrix<S>& t, const Matrix<S>& att_src,
                        const Matrix<S>& att_dst, int heads, bool concat, Matrix<S>& alpha, Matrix<S>& pre) {
  const Eigen::Index n = t.rows();
  const Eigen::Index f = t.cols() / heads;
  const auto nnz = static_cast<Eigen::Index>(ops.attn_col.size());
  alpha.resize(nnz, heads);
  pre.resize(nnz, heads);
  Matrix<S> out = Matrix<S>::Zero(n, concat ? heads * f : f);
  const S scale = concat ? S(1) : S(1) / static_cast<S>(heads);
  for (int k = 0; k < heads; ++k) {
    const auto tk = t.middleCols(k * f, f);
    const Eigen::Matrix<S, Eigen::Dynamic, 1> s_src = tk * att_src.row(k).transpose();
    const Eigen::Matrix<S, Eigen::Dynamic, 1> s_dst = tk * att_dst.row(k).transpose();
    const Eigen::Index out_col = concat ? k * f : 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto begin = static_cast<Eigen::Index>(ops.attn_ptr[i]);
      const auto end = static_cast<Eigen::Index>(ops.attn_ptr[i + 1]);
      S max_e = -std::numeric_limits<S>::infinity();
      for (Eigen::Index p = begin; p < end; ++p) {
        const S z = s_dst(i) + s_src(ops.attn_col[p]);
        pre(p, k) = z;
        const S e = z > 0 ? z : static_cast<S>(kLeakySlope) * z;
        alpha(p, k) = e;
        max_e = std::max(max_e, e);
      }
      S total = 0;
      for (Eigen::Index p = begin; p < end; ++p) {
        alpha(p, k) = std::exp(alpha(p, k) - max_e);
        total += alpha(p, k);
      }
      for (Eigen::Index p = begin; p < end; ++p) {
        alpha(p, k) /= total;
        out.row(i).segment(out_col, f) += (scale * alpha(p, k)) * tk.row(ops.attn_col[p]);
      }
    }
  }
  return out;
}

template <typename S>
void gat_aggregate_backward(const GraphOperators<S>& ops, const Matrix<S>& t, const Matrix<S>& att_src,
                            const Matrix<S>& att_dst, int heads, bool concat, const Matrix<S>& alpha,
                            const Matrix<S>& pre, const Matrix<S>& d_out, Matrix<S>& d_t, Matrix<S>& d_src,
                            Matrix<S>& d_dst) {
  const Eigen::Index n = t.rows();
  const Eigen::Index f = t.cols() / heads;
  d_t = Matrix<S>::Zero(n, t.cols());
  d_src = Matrix<S>::Zero(heads, f);
  d_dst = Matrix<S>::Zero(heads, f);
  const S scale = concat ? S(1) : S(1) / static_cast<S>(heads);
  std::vector<S> d_alpha;
  for (int k = 0; k < heads; ++k) {
    const auto tk = t.middleCols(k * f, f);
    auto dtk = d_t.middleCols(k * f, f);
    const Matrix<S> d_o = d_out.middleCols(concat ? k * f : 0, f) * scale;
    Eigen::Matrix<S, Eigen::Dynamic, 1> ds_src = Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(n);
    Eigen::Matrix<S, Eigen::Dynamic, 1> ds_dst = Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto begin = static_cast<Eigen::Index>(ops.attn_ptr[i]);
      const auto end = static_cast<Eigen::Index>(ops.attn_ptr[i + 1]);
      d_alpha.assign(static_cast<std::size_t>(end - begin), S(0));
      S weighted = 0;
      for (Eigen::Index p = begin; p < end; ++p) {
        const NodeId j = ops.attn_col[p];
        const S da = d_o.row(i).dot(tk.row(j));
        d_alpha[static_cast<std::size_t>(p - begin)] = da;
        weighted += alpha(p, k) * da;
        dtk.row(j) += alpha(p, k) * d_o.row(i);
      }
      for (Eigen::Index p = begin; p < end; ++p) {
        const S de = alpha(p, k) * (d_alpha[static_cast<std::size_t>(p - begin)] - weighted);
        const S dz = pre(p, k) > 0 ? de : static_cast<S>(kLeakySlope) * de;
        ds_dst(i) += dz;
        ds_src(ops.attn_col[p]) += dz;
      }
    }
    dtk += ds_src * att_src.row(k) + ds_dst * att_dst.row(k);
    d_src.row(k) = ds_src.transpose() * tk;
    d_dst.row(k) = ds_dst.transpose() * tk;
  }
}

template <typename S>
Matrix<S> activate(GnnKind kind, const Matrix<S>& a) {
  if (kind == GnnKind::gat) return a.unaryExpr([](S x) { return x > 0 ? x : std::expm1(x); });
  return a.cwiseMax(S(0));
}

template <typename S>
Matrix<S> activation_grad(GnnKind kind, const Matrix<S>& a) {
  if (kind == GnnKind::gat) return a.unaryExpr([](S x) { return x > 0 ? S(1) : std::exp(x); });
  return a.unaryExpr([](S x) { return x > 0 ? S(1) : S(0); });
}

}  // namespace

template <typename S>
GraphOperators<S> GraphOperators<S>::build(GnnKind kind, std::size_t num_nodes, std::span<const Edge> edges) {
  GraphOperators ops;
  ops.num_nodes = num_nodes;
  switch (kind) {
    case GnnKind::gcn:
      ops.gcn = normalize_adjacency<S>(num_nodes, edges);
      break;
    case GnnKind::sage:
      ops.mean = mean_aggregation<S>(num_nodes, edges);
      break;
    case GnnKind::gat: {
      std::vector<std::size_t> degree(num_nodes, 1);
      for (const Edge& e : edges) {
        ++degree[e.u];
        ++degree[e.v];
      }
      ops.attn_ptr.assign(num_nodes + 1, 0);
      for (std::size_t i = 0; i < num_nodes; ++i) ops.attn_ptr[i + 1] = ops.attn_ptr[i] + degree[i];
      ops.attn_col.assign(ops.attn_ptr[num_nodes], 0);
      std::vector<std::size_t> cursor(ops.attn_ptr.begin(), ops.attn_ptr.end() - 1);
      for (std::size_t i = 0; i < num_nodes; ++i) ops.attn_col[cursor[i]++] = static_cast<NodeId>(i);
      for (const Edge& e : edges) {
        ops.attn_col[cursor[e.u]++] = e.v;
        ops.attn_col[cursor[e.v]++] = e.u;
      }
      break;
    }
  }
  return ops;
}

template <typename S>
FeatureInput<S>::FeatureInput(const Eigen::MatrixXd& values) : rows_(values.rows()), cols_(values.cols()) {
  const auto nonzeros = (values.array() != 0.0).count();
  const double density = values.size() ? static_cast<double>(nonzeros) / static_cast<double>(values.size()) : 1.0;
  sparse_ = density < 0.25;
  if (sparse_) {
    sp_ = values.cast<S>().sparseView();
    sp_.makeCompressed();
  } else {
    dense_ = values.cast<S>();
  }
}

template <typename S>
Matrix<S> FeatureInput<S>::times(const Matrix<S>& w) const {
  if (sparse_) return spmm(sp_, w);
  return dense_ * w;
}

template <typename S>
Matrix<S> FeatureInput<S>::transpose_times(const Matrix<S>& g) const {
  if (sparse_) return spmm_transposed(sp_, g);
  return dense_.transpose() * g;
}

template <typename S>
ParameterList<S> init_parameters(const GnnArch& arch, std::size_t input_dim, int num_classes, std::uint64_t seed) {
  arch.validate();
  Rng rng(derive_seed(seed, 0));
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(arch.hidden);
  const auto c = static_cast<Eigen::Index>(num_classes);
  auto fan = [](Eigen::Index a, Eigen::Index b) { return static_cast<double>(a + b); };
  ParameterList<S> p;
  switch (arch.kind) {
    case GnnKind::gcn:
      p.push_back({"conv1.weight", glorot<S>(d, h, fan(d, h), rng)});
      p.push_back({"conv1.bias", Matrix<S>::Zero(1, h)});
      p.push_back({"conv2.weight", glorot<S>(h, c, fan(h, c), rng)});
      p.push_back({"conv2.bias", Matrix<S>::Zero(1, c)});
      break;
    case GnnKind::sage:
      p.push_back({"conv1.self_weight", glorot<S>(d, h, fan(d, h), rng)});
      p.push_back({"conv1.neigh_weight", glorot<S>(d, h, fan(d, h), rng)});
      p.push_back({"conv1.bias", Matrix<S>::Zero(1, h)});
      p.push_back({"conv2.self_weight", glorot<S>(h, c, fan(h, c), rng)});
      p.push_back({"conv2.neigh_weight", glorot<S>(h, c, fan(h, c), rng)});
      p.push_back({"conv2.bias", Matrix<S>::Zero(1, c)});
      break;
    case GnnKind::gat: {
      const Eigen::Index h1 = arch.heads_layer1;
      const Eigen::Index f1 = h / h1;
      const Eigen::Index h2 = arch.heads_layer2;
      p.push_back({"conv1.weight", glorot<S>(d, h1 * f1, fan(d, h1 * f1), rng)});
      p.push_back({"conv1.att_src", glorot<S>(h1, f1, fan(h1, f1), rng)});
      p.push_back({"conv1.att_dst", glorot<S>(h1, f1, fan(h1, f1), rng)});
      p.push_back({"conv1.bias", Matrix<S>::Zero(1, h1 * f1)});
      p.push_back({"conv2.weight", glorot<S>(h1 * f1, h2 * c, fan(h1 * f1, h2 * c), rng)});
      p.push_back({"conv2.att_src", glorot<S>(h2, c, fan(h2, c), rng)});
      p.push_back({"conv2.att_dst", glorot<S>(h2, c, fan(h2, c), rng)});
      p.push_back({"conv2.bias", Matrix<S>::Zero(1, c)});
      break;
    }
  }
  return p;
}

template <typename S>
Matrix<S> first_transform(const GnnArch& arch, const FeatureInput<S>& x, const ParameterList<S>& params) {
  if (arch.kind == GnnKind::sage) {
    return hcat<S>(x.times(params[sage_slot::w1_self].value), x.times(params[sage_slot::w1_neigh].value));
  }
  return x.times(params[0].value);
}

template <typename S>
Matrix<S> forward_from_transform(const GnnArch& arch, const GraphOperators<S>& ops, Matrix<S> t1,
                                 const ParameterList<S>& params, Rng* rng, ForwardCache<S>* cache) {
  ForwardCache<S> local;
  ForwardCache<S>& c = cache ? *cache : local;
  c.t1 = std::move(t1);

  switch (arch.kind) {
    case GnnKind::gcn:
      c.a1 = spmm(ops.gcn, c.t1);
      add_bias<S>(c.a1, params[gcn_slot::b1].value);
      break;
    case GnnKind::sage: {
      const Eigen::Index h = c.t1.cols() / 2;
      c.a1 = c.t1.leftCols(h) + spmm(ops.mean, c.t1.rightCols(h));
      add_bias<S>(c.a1, params[sage_slot::b1].value);
      break;
    }
    case GnnKind::gat:
      c.a1 = gat_aggregate<S>(ops, c.t1, params[gat_slot::att_src1].value, params[gat_slot::att_dst1].value,
                              arch.heads_layer1, true, c.alpha1, c.pre1);
      add_bias<S>(c.a1, params[gat_slot::b1].value);
      break;
  }

  c.h = activate<S>(arch.kind, c.a1);
  if (rng && arch.dropout > 0.0) {
    // raw 64-bit draws against a threshold; std::bernoulli_distribution is far slower
    const auto threshold = static_cast<std::uint64_t>(std::ldexp(1.0 - arch.dropout, 64) - 1.0);
    const S scale = static_cast<S>(1.0 / (1.0 - arch.dropout));
    c.mask.resize(c.h.rows(), c.h.cols());
    S* m = c.mask.data();
    for (Eigen::Index i = 0; i < c.mask.size(); ++i) m[i] = (*rng)() < threshold ? scale : S(0);
    c.h = c.h.cwiseProduct(c.mask);
  } else {
    c.mask.resize(0, 0);
  }

  Matrix<S> logits;
  switch (arch.kind) {
    case GnnKind::gcn:
      c.t2 = c.h * params[gcn_slot::w2].value;
      logits = spmm(ops.gcn, c.t2);
      add_bias<S>(logits, params[gcn_slot::b2].value);
      break;
    case GnnKind::sage: {
      c.t2 = hcat<S>(c.h * params[sage_slot::w2_self].value, c.h * params[sage_slot::w2_neigh].value);
      const Eigen::Index k = c.t2.cols() / 2;
      logits = c.t2.leftCols(k) + spmm(ops.mean, c.t2.rightCols(k));
      add_bias<S>(logits, params[sage_slot::b2].value);
      break;
    }
    case GnnKind::gat:
      c.t2 = c.h * params[gat_slot::w2].value;
      logits = gat_aggregate<S>(ops, c.t2, params[gat_slot::att_src2].value, params[gat_slot::att_dst2].value,
                                arch.heads_layer2, false, c.alpha2, c.pre2);
      add_bias<S>(logits, params[gat_slot::b2].value);
      break;
  }
  return logits;
}

template <typename S>
void backward(const GnnArch& arch, const GraphOperators<S>& ops, const FeatureInput<S>& x,
              const ParameterList<S>& params, const ForwardCache<S>& c, const Matrix<S>& d_logits,
              ParameterList<S>& grads) {
  Matrix<S> d_h;
  Matrix<S> d_t1;
  switch (arch.kind) {
    case GnnKind::gcn: {
      grads[gcn_slot::b2].value += column_sums<S>(d_logits);
      const Matrix<S> d_t2 = spmm(ops.gcn, d_logits);  // normalized adjacency is symmetric
      grads[gcn_slot::w2].value += c.h.transpose() * d_t2;
      d_h = d_t2 * params[gcn_slot::w2].value.transpose();
      break;
    }
    case GnnKind::sage: {
      grads[sage_slot::b2].value += column_sums<S>(d_logits);
      const Matrix<S> d_neigh = spmm_transposed(ops.mean, d_logits);
      grads[sage_slot::w2_self].value += c.h.transpose() * d_logits;
      grads[sage_slot::w2_neigh].value += c.h.transpose() * d_neigh;
      d_h = d_logits * params[sage_slot::w2_self].value.transpose() +
            d_neigh * params[sage_slot::w2_neigh].value.transpose();
      break;
    }
    case GnnKind::gat: {
      grads[gat_slot::b2].value += column_sums<S>(d_logits);
      Matrix<S> d_t2, d_src, d_dst;
      gat_aggregate_backward<S>(ops, c.t2, params[gat_slot::att_src2].value, params[gat_slot::att_dst2].value,
                                arch.heads_layer2, false, c.alpha2, c.pre2, d_logits, d_t2, d_src, d_dst);
      grads[gat_slot::att_src2].value += d_src;
      grads[gat_slot::att_dst2].value += d_dst;
      grads[gat_slot::w2].value += c.h.transpose() * d_t2;
      d_h = d_t2 * params[gat_slot::w2].value.transpose();
      break;
    }
  }

  if (c.mask.size() != 0) d_h = d_h.cwiseProduct(c.mask);
  const Matrix<S> d_a1 = d_h.cwiseProduct(activation_grad<S>(arch.kind, c.a1));

  switch (arch.kind) {
    case GnnKind::gcn:
      grads[gcn_slot::b1].value += column_sums<S>(d_a1);
      d_t1 = spmm(ops.gcn, d_a1);
      grads[gcn_slot::w1].value += x.transpose_times(d_t1);
      break;
    case GnnKind::sage:
      grads[sage_slot::b1].value += column_sums<S>(d_a1);
      grads[sage_slot::w1_self].value += x.transpose_times(d_a1);
      grads[sage_slot::w1_neigh].value += x.transpose_times(spmm_transposed(ops.mean, d_a1));
      break;
    case GnnKind::gat: {
      grads[gat_slot::b1].value += column_sums<S>(d_a1);
      Matrix<S> d_src, d_dst;
      gat_aggregate_backward<S>(ops, c.t1, params[gat_slot::att_src1].value, params[gat_slot::att_dst1].value,
                                arch.heads_layer1, true, c.alpha1, c.pre1, d_a1, d_t1, d_src, d_dst);
      grads[gat_slot::att_src1].value += d_src;
      grads[gat_slot::att_dst1].value += d_dst;
      grads[gat_slot::w1].value += x.transpose_times(d_t1);
      break;
    }
  }
}

template <typename S>
Matrix<S> softmax_rows(const Matrix<S>& logits) {
  Matrix<S> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const S m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename S>
S cross_entropy(const Matrix<S>& logits, std::span<const ClassId> labels, std::span<const NodeId> nodes,
                Matrix<S>* d_logits) {
  if (d_logits) *d_logits = Matrix<S>::Zero(logits.rows(), logits.cols());
  if (nodes.empty()) return S(0);
  const S inv = S(1) / static_cast<S>(nodes.size());
  S loss = 0;
  for (NodeId v : nodes) {
    const auto row = logits.row(v);
    const S m = row.maxCoeff();
    const auto e = (row.array() - m).exp();
    const S total = e.sum();
    loss += std::log(total) + m - row(labels[v]);
    if (d_logits) {
      d_logits->row(v) = (e / total).matrix() * inv;
      (*d_logits)(v, labels[v]) -= inv;
    }
  }
  return loss * inv;
}

template <typename S>
ParameterList<S> zeros_like(const ParameterList<S>& params) {
  ParameterList<S> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back({p.name, Matrix<S>::Zero(p.value.rows(), p.value.cols())});
  return out;
}

template <typename S>
S loss_and_gradient(const GnnArch& arch, const GraphOperators<S>& ops, const FeatureInput<S>& x,
                    std::span<const ClassId> labels, std::span<const NodeId> nodes, const ParameterList<S>& params,
                    double weight_decay, ParameterList<S>* grads) {
  ForwardCache<S> cache;
  const Matrix<S> logits = forward<S>(arch, ops, x, params, nullptr, &cache);
  Matrix<S> d_logits;
  S loss = cross_entropy<S>(logits, labels, nodes, grads ? &d_logits : nullptr);
  const S wd = static_cast<S>(weight_decay);
  for (const auto& p : params) loss += wd / 2 * p.value.squaredNorm();
  if (grads) {
    *grads = zeros_like(params);
    backward<S>(arch, ops, x, params, cache, d_logits, *grads);
    for (std::size_t i = 0; i < params.size(); ++i) (*grads)[i].value += wd * params[i].value;
  }
  return loss;
}

template <typename S>
std::pair<Matrix<S>, Matrix<S>> gat_attention(const GnnArch& arch, const GraphOperators<S>& ops,
                                              const FeatureInput<S>& x, const ParameterList<S>& params) {
  if (arch.kind != GnnKind::gat) throw ConfigError("gat_attention: architecture is not gat");
  ForwardCache<S> cache;
  forward<S>(arch, ops, x, params, nullptr, &cache);
  return {cache.alpha1, cache.alpha2};
}

#define POISONBENCH_INSTANTIATE(S)                                                                              \
  template struct GraphOperators<S>;                                                                            \
  template class FeatureInput<S>;                                                                               \
  template ParameterList<S> init_parameters<S>(const GnnArch&, std::size_t, int, std::uint64_t);               \
  template Matrix<S> first_transform<S>(const GnnArch&, const FeatureInput<S>&, const ParameterList<S>&);      \
  template Matrix<S> forward_from_transform<S>(const GnnArch&, const GraphOperators<S>&, Matrix<S>,             \
                                               const ParameterList<S>&, Rng*, ForwardCache<S>*);                \
  template void backward<S>(const GnnArch&, const GraphOperators<S>&, const FeatureInput<S>&,                   \
                            const ParameterList<S>&, const ForwardCache<S>&, const Matrix<S>&,                  \
                            ParameterList<S>&);                                                                 \
  template S cross_entropy<S>(const Matrix<S>&, std::span<const ClassId>, std::span<const NodeId>, Matrix<S>*); \
  template S loss_and_gradient<S>(const GnnArch&, const GraphOperators<S>&, const FeatureInput<S>&,             \
                                  std::span<const ClassId>, std::span<const NodeId>, const ParameterList<S>&,   \
                                  double, ParameterList<S>*);                                                   \
  template Matrix<S> softmax_rows<S>(const Matrix<S>&);                                                         \
  template std::pair<Matrix<S>, Matrix<S>> gat_attention<S>(const GnnArch&, const GraphOperators<S>&,          \
                                                            const FeatureInput<S>&, const ParameterList<S>&);   \
  template ParameterList<S> zeros_like<S>(const ParameterList<S>&);

POISONBENCH_INSTANTIATE(float)
POISONBENCH_INSTANTIATE(double)

#undef POISONBENCH_INSTANTIATE

}  // namespace poisonbench

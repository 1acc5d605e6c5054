#include "poisonbench/attacks/meta_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poisonbench/victims/normalize.hpp"
#include "poisonbench/victims/surrogate.hpp"

namespace poisonbench {

namespace {

using Dense = Matrix<double>;
using Sparse = SparseMatrix<double>;

Dense softmax(const Dense& z) {
  Dense out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    out.row(i) = (z.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Dense gather_rows(const Dense& m, const std::vector<NodeId>& rows) {
  Dense out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Dense one_hot(const std::vector<ClassId>& y, int classes) {
  Dense out = Dense::Zero(static_cast<Eigen::Index>(y.size()), classes);
  for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), y[i]) = 1.0;
  return out;
}

}  // namespace

MetaObjective::MetaObjective(Eigen::MatrixXd features, int num_classes, std::vector<NodeId> labeled,
                             std::vector<ClassId> labeled_classes, std::vector<NodeId> unlabeled,
                             std::vector<ClassId> pseudo_classes, MetaGradientConfig cfg)
    : x_(std::move(features)),
      classes_(num_classes),
      labeled_(std::move(labeled)),
      unlabeled_(std::move(unlabeled)),
      labeled_y_(std::move(labeled_classes)),
      pseudo_y_(std::move(pseudo_classes)),
      cfg_(cfg) {
  if (labeled_.empty()) throw ConfigError("meta-gradient: no labeled nodes");
  if (unlabeled_.empty()) throw ConfigError("meta-gradient: no unlabeled nodes");
  if (labeled_.size() != labeled_y_.size() || unlabeled_.size() != pseudo_y_.size()) {
    throw ValidationError("meta-gradient: label lists do not match node lists");
  }
  if (cfg_.inner_steps < 1) throw ConfigError("meta-gradient: inner_steps must be positive");
}

double MetaObjective::evaluate(const Eigen::MatrixXd& adjacency, Eigen::MatrixXd* grad) const {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n || x_.rows() != n) throw ValidationError("meta-gradient: shape mismatch");

  // Ã = A + I, s = d^-1/2 with d the row sums of Ã, Â = diag(s) Ã diag(s)
  const Eigen::VectorXd s = (adjacency.rowwise().sum().array() + 1.0).rsqrt().matrix();
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = adjacency(i, j) + (i == j ? 1.0 : 0.0);
      if (a != 0.0) trip.emplace_back(i, j, s(i) * a * s(j));
    }
  }
  Sparse a_hat(n, n);
  a_hat.setFromTriplets(trip.begin(), trip.end());

  const Dense x = x_;
  const Dense y = spmm(a_hat, x);
  const Dense p = spmm(a_hat, y);
  const Dense p_l = gather_rows(p, labeled_);
  const Dense p_u = gather_rows(p, unlabeled_);
  const Dense y_l = one_hot(labeled_y_, classes_);
  const auto n_l = static_cast<double>(labeled_.size());
  const auto n_u = static_cast<double>(unlabeled_.size());
  const double lr = cfg_.inner_lr;
  const double mu = cfg_.momentum;
  const double wd = cfg_.weight_decay;

  std::vector<Dense> ws;
  ws.reserve(static_cast<std::size_t>(cfg_.inner_steps) + 1);
  Dense w = Dense::Zero(x.cols(), classes_);
  Dense v = Dense::Zero(x.cols(), classes_);
  for (int t = 0; t < cfg_.inner_steps; ++t) {
    ws.push_back(w);
    const Dense r = softmax(p_l * w) - y_l;
    const Dense g = p_l.transpose() * r / n_l + wd * w;
    v = mu * v + g;
    w -= lr * v;
  }

  const Dense prob_u = softmax(p_u * w);
  double loss = 0.0;
  for (std::size_t i = 0; i < unlabeled_.size(); ++i) {
    loss -= std::log(std::max(prob_u(static_cast<Eigen::Index>(i), pseudo_y_[i]), std::numeric_limits<double>::min()));
  }
  loss /= n_u;
  if (!grad) return loss;

  // reverse pass through the outer loss and the unrolled inner steps
  const Dense g_out = (prob_u - one_hot(pseudo_y_, classes_)) / n_u;
  Dense w_bar = p_u.transpose() * g_out;
  Dense v_bar = Dense::Zero(x.cols(), classes_);
  Dense p_l_bar = Dense::Zero(p_l.rows(), p_l.cols());
  for (int t = cfg_.inner_steps - 1; t >= 0; --t) {
    const Dense& w_t = ws[static_cast<std::size_t>(t)];
    v_bar -= lr * w_bar;
    const Dense g_bar = v_bar;
    v_bar *= mu;
    const Dense sm = softmax(p_l * w_t);
    const Dense r = sm - y_l;
    w_bar += wd * g_bar;
    p_l_bar.noalias() += r * g_bar.transpose() / n_l;
    const Dense m = p_l * g_bar / n_l;
    Dense z_bar = sm.cwiseProduct(m);
    const Eigen::VectorXd row_sum = z_bar.rowwise().sum();
    z_bar -= sm.cwiseProduct(row_sum * Eigen::RowVectorXd::Ones(classes_));
    w_bar.noalias() += p_l.transpose() * z_bar;
    p_l_bar.noalias() += z_bar * w_t.transpose();
  }

  // P = Â Y, Y = Â X: Â_bar = P_bar Y^T + Â^T P_bar X^T. P_bar is G_out W^T on the
  // unlabeled rows, so those terms go through the C-column factors.
  Dense g_full = Dense::Zero(n, classes_);
  for (std::size_t i = 0; i < unlabeled_.size(); ++i) g_full.row(unlabeled_[i]) = g_out.row(static_cast<Eigen::Index>(i));
  const Dense yw = y * w;
  const Dense xw = x * w;
  Dense a_bar = g_full * yw.transpose();
  const Dense pl_y = p_l_bar * y.transpose();
  const Dense pl_x = p_l_bar * x.transpose();
  Dense q = Dense::Zero(n, n);
  for (std::size_t i = 0; i < labeled_.size(); ++i) {
    a_bar.row(labeled_[i]) += pl_y.row(static_cast<Eigen::Index>(i));
    q.row(labeled_[i]) = pl_x.row(static_cast<Eigen::Index>(i));
  }
  a_bar.noalias() += spmm_transposed(a_hat, g_full) * xw.transpose();
  a_bar += spmm_transposed(a_hat, q);

  // through the normalization
  Eigen::VectorXd s_bar = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < a_hat.outerSize(); ++i) {
    for (Sparse::InnerIterator it(a_hat, i); it; ++it) {
      // it.value() = s_i a_ij s_j
      const Eigen::Index j = it.col();
      const double contrib = a_bar(i, j) * it.value();
      s_bar(i) += contrib / s(i);
      s_bar(j) += contrib / s(j);
    }
  }
  const Eigen::VectorXd d_bar = -0.5 * s.array().cube() * s_bar.array();
  *grad = (s * s.transpose()).cwiseProduct(a_bar);
  grad->colwise() += d_bar;
  return loss;
}

PerturbationSet meta_gradient_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                     const NodeSplit& split, const BudgetSpec& budget, std::uint64_t seed,
                                     const MetaGradientConfig& cfg) {
  budget.validate();
  if (budget.structural_mode != StructuralMode::global_rate) throw ConfigError("meta: needs a global_rate budget");
  const std::size_t n = graph.num_nodes();
  if (features.rows() != n) throw ValidationError("meta: feature rows do not match the graph");
  split.validate(n);

  PerturbationSet out;
  out.attack_name = "meta";
  out.seed = seed;
  out.budget = budget;
  const std::size_t flips = budget.max_flips(graph.num_edges(), 0);
  if (flips == 0) return out;

  std::vector<bool> is_labeled(n, false);
  std::vector<ClassId> labeled_y;
  for (NodeId v : split.train) {
    is_labeled[v] = true;
    labeled_y.push_back(graph.labels()[v]);
  }
  const auto surrogate = train_surrogate(graph, features, split.train);
  const auto predicted = surrogate_predict(surrogate, graph, features);
  std::vector<NodeId> unlabeled;
  std::vector<ClassId> pseudo;
  for (NodeId v = 0; v < n; ++v) {
    if (!is_labeled[v]) {
      unlabeled.push_back(v);
      pseudo.push_back(predicted[v]);
    }
  }
  const MetaObjective objective(features.values, graph.num_classes(), split.train, labeled_y, unlabeled, pseudo, cfg);

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(ni, ni);
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : graph.edges()) {
    adj(e.u, e.v) = adj(e.v, e.u) = 1.0;
    ++degree[e.u];
    ++degree[e.v];
  }
  std::vector<bool> flipped(n * n, false);
  Eigen::MatrixXd grad;
  for (std::size_t step = 0; step < flips; ++step) {
    objective.evaluate(adj, &grad);
    double best = -std::numeric_limits<double>::infinity();
    NodeId bu = 0;
    NodeId bv = 0;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (flipped[static_cast<std::size_t>(i) * n + j]) continue;
        const bool present = adj(i, j) != 0.0;
        if (present && ((is_labeled[i] && degree[i] == 1) || (is_labeled[j] && degree[j] == 1))) continue;
        const double score = (grad(i, j) + grad(j, i)) * (present ? -1.0 : 1.0);
        if (score > best) {
          best = score;
          bu = i;
          bv = j;
        }
      }
    }
    if (best == -std::numeric_limits<double>::infinity()) {
      out.warnings.push_back("meta: no feasible flip left after " + std::to_string(step) + " of " +
                             std::to_string(flips) + " flips");
      break;
    }
    const bool present = adj(bu, bv) != 0.0;
    out.edge_flips.push_back({bu, bv, present ? FlipKind::remove : FlipKind::add});
    flipped[static_cast<std::size_t>(bu) * n + bv] = true;
    adj(bu, bv) = adj(bv, bu) = present ? 0.0 : 1.0;
    const int delta = present ? -1 : 1;
    degree[bu] = static_cast<std::size_t>(static_cast<long>(degree[bu]) + delta);
    degree[bv] = static_cast<std::size_t>(static_cast<long>(degree[bv]) + delta);
  }
  return out;
}

}  // namespace poisonbench

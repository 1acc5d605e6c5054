#pragma once

// Exhaustive reference for one step of the targeted attack: every candidate flip is
// applied to a dense copy of the graph and the target's margin recomputed from scratch.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <span>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "poisonbench/attacks/targeted.hpp"

namespace pbtest {

// Â² H row of `t` from a dense adjacency, written out directly.
inline Eigen::RowVectorXd dense_logits(const TextAttributedGraph& g, std::span<const Edge> edges, const Matrix<double>& h,
                                       NodeId t) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (const Edge& e : edges) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  Eigen::VectorXd d = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd norm = d.asDiagonal() * a * d.asDiagonal();
  Eigen::MatrixXd z = norm * norm * Eigen::MatrixXd(h);
  return z.row(t);
}

inline double margin(const Eigen::RowVectorXd& z, ClassId c) {
  double other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (k != c) other = std::max(other, z(k));
  }
  return z(c) - other;
}

struct TargetedCase {
  NodeId target = 0;
  Edge want;  // exhaustive best, lowest pair among ties
  std::vector<EdgeFlip> got;
  bool want_is_edge = false;
};

// Random graph of 5-10 nodes, one test target, budget 1.
inline TargetedCase targeted_case(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(5, 10)(rng);
  auto g = random_graph(n, 0.35, 2, seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  NodeSplit split;
  for (NodeId v = 0; v < n; ++v) (v % 2 ? split.test : split.train).push_back(v);
  const EmbeddingMatrix feats{x, "toy"};
  const NodeId t = split.test[std::uniform_int_distribution<std::size_t>(0, split.test.size() - 1)(rng)];

  TargetedAttacker attacker(g, feats, split);
  const ClassId c = attacker.attacked_class(t);

  // every pair touching the target or one of its neighbors, scored from scratch
  std::vector<NodeId> centers{t};
  for (NodeId v : g.neighbors(t)) centers.push_back(v);
  std::set<Edge> pool;
  for (NodeId a : centers) {
    for (NodeId b = 0; b < n; ++b) {
      if (a != b) pool.insert(Edge::canonical(a, b));
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Edge>> scored;
  for (const Edge& e : pool) {
    std::vector<Edge> edges = g.edges();
    auto it = std::find(edges.begin(), edges.end(), e);
    if (it != edges.end()) edges.erase(it);
    else edges.push_back(e);
    const double m = margin(dense_logits(g, edges, attacker.transformed(), t), c);
    scored.emplace_back(m, e);
    best = std::min(best, m);
  }
  TargetedCase out;
  out.target = t;
  out.want = {static_cast<NodeId>(n), static_cast<NodeId>(n)};
  for (const auto& [m, e] : scored) {
    if (m <= best + 1e-10 * std::max(1.0, std::abs(best))) out.want = std::min(out.want, e);
  }
  out.want_is_edge = g.has_edge(out.want.u, out.want.v);
  TargetSet ts{.nodes = {t}};
  BudgetSpec budget{.structural_mode = StructuralMode::per_target, .per_target = 1};
  out.got = targeted_gradient_attack(g, feats, split, ts, budget, 0).edge_flips;
  return out;
}

// True when the attack made exactly the exhaustive-best flip.
inline bool matches(const TargetedCase& c) {
  return c.got.size() == 1 && Edge{c.got[0].u, c.got[0].v} == c.want &&
         c.got[0].kind == (c.want_is_edge ? FlipKind::remove : FlipKind::add);
}

}  // namespace pbtest

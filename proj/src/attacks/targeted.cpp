#include "poisonbench/attacks/targeted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "poisonbench/victims/normalize.hpp"
#include "poisonbench/victims/surrogate.hpp"

namespace poisonbench {

namespace {

using Adjacency = std::vector<std::vector<NodeId>>;

void toggle_pair(Adjacency& adj, NodeId a, NodeId b) {
  auto flip_one = [](std::vector<NodeId>& list, NodeId x) {
    const auto it = std::lower_bound(list.begin(), list.end(), x);
    if (it != list.end() && *it == x) list.erase(it);
    else list.insert(it, x);
  };
  flip_one(adj[a], b);
  flip_one(adj[b], a);
}

// z_t = D_t^-1/2 sum_{j in N[t]} D_j^-1 sum_{k in N[j]} D_k^-1/2 h_k, D = degree + 1
void local_logits(const Adjacency& adj, const Matrix<double>& h, NodeId t, Eigen::RowVectorXd& z,
                  Eigen::RowVectorXd& acc) {
  auto inv_sqrt = [&](NodeId x) { return 1.0 / std::sqrt(static_cast<double>(adj[x].size() + 1)); };
  z.setZero();
  auto add_inner = [&](NodeId j) {
    acc.noalias() = h.row(j) * inv_sqrt(j);
    for (NodeId k : adj[j]) acc.noalias() += h.row(k) * inv_sqrt(k);
    z.noalias() += acc / static_cast<double>(adj[j].size() + 1);
  };
  add_inner(t);
  for (NodeId j : adj[t]) add_inner(j);
  z *= inv_sqrt(t);
}

double margin_of(const Eigen::RowVectorXd& z, ClassId c) {
  double other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (k != c) other = std::max(other, z(k));
  }
  return z(c) - other;
}

}  // namespace

TargetedAttacker::TargetedAttacker(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                   const NodeSplit& split)
    : graph_(&graph) {
  if (features.rows() != graph.num_nodes()) throw ValidationError("targeted: feature rows do not match the graph");
  split.validate(graph.num_nodes());
  const auto surrogate = train_surrogate(graph, features, split.train);
  h_ = features.values * surrogate.weight.cast<double>();
  target_class_ = surrogate_predict(surrogate, graph, features);
  for (NodeId v : split.train) target_class_[v] = graph.labels()[v];
}

double TargetedAttacker::margin(NodeId target, std::span<const Edge> edges) const {
  const auto a_hat = normalize_adjacency<double>(graph_->num_nodes(), edges);
  const Matrix<double> z = spmm(a_hat, spmm(a_hat, h_));
  return margin_of(z.row(target), target_class_[target]);
}

std::vector<TargetedAttacker::Step> TargetedAttacker::attack(NodeId target, int budget) const {
  const std::size_t n = graph_->num_nodes();
  if (target >= n) throw ValidationError("targeted: target " + std::to_string(target) + " out of range");
  if (budget < 1 || budget > 5) throw ConfigError("targeted: per-target budget must lie in [1, 5]");
  Adjacency adj(n);
  for (NodeId v = 0; v < n; ++v) adj[v].assign(graph_->neighbors(v).begin(), graph_->neighbors(v).end());
  const ClassId c = target_class_[target];

  std::set<Edge> flipped;
  std::vector<Step> steps;
  std::vector<bool> is_center(n, false);
  Eigen::RowVectorXd z(h_.cols());
  Eigen::RowVectorXd acc(h_.cols());
  for (int b = 0; b < budget; ++b) {
    std::vector<NodeId> centers{target};
    centers.insert(centers.end(), adj[target].begin(), adj[target].end());
    std::fill(is_center.begin(), is_center.end(), false);

    double best = std::numeric_limits<double>::infinity();
    double chosen = best;
    Edge best_pair{};
    bool found = false;
    for (NodeId center : centers) {
      for (NodeId v = 0; v < n; ++v) {
        // a pair between two centers is met once, from the earlier center
        if (v == center || is_center[v]) continue;
        const Edge e = Edge::canonical(center, v);
        if (flipped.count(e)) continue;
        toggle_pair(adj, e.u, e.v);
        local_logits(adj, h_, target, z, acc);
        toggle_pair(adj, e.u, e.v);
        const double m = margin_of(z, c);
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        if (!found || m < best - tol) {
          best = m;
          chosen = m;
          best_pair = e;
          found = true;
        } else if (m <= best + tol && e < best_pair) {
          best = std::min(best, m);
          chosen = m;
          best_pair = e;
        }
      }
      is_center[center] = true;
    }
    if (!found) {
      if (b == 0) throw ValidationError("targeted: target " + std::to_string(target) + " has no candidate flips");
      break;
    }
    steps.push_back({toggle(*graph_, best_pair.u, best_pair.v), chosen});
    flipped.insert(best_pair);
    toggle_pair(adj, best_pair.u, best_pair.v);
  }
  return steps;
}

PerturbationSet targeted_gradient_attack(const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                                         const NodeSplit& split, const TargetSet& targets, const BudgetSpec& budget,
                                         std::uint64_t seed) {
  budget.validate();
  if (budget.structural_mode != StructuralMode::per_target) throw ConfigError("targeted: needs a per_target budget");
  PerturbationSet out;
  out.attack_name = "targeted";
  out.seed = seed;
  out.budget = budget;
  out.targets = targets.nodes;
  const TargetedAttacker attacker(graph, features, split);
  std::set<Edge> seen;
  for (NodeId t : targets.nodes) {
    const auto steps = attacker.attack(t, budget.per_target);
    if (steps.size() < static_cast<std::size_t>(budget.per_target)) {
      out.warnings.push_back("targeted: candidate pool of target " + std::to_string(t) + " exhausted");
    }
    for (const auto& s : steps) {
      if (seen.insert(Edge{s.flip.u, s.flip.v}).second) out.edge_flips.push_back(s.flip);
    }
  }
  return out;
}

}  // namespace poisonbench

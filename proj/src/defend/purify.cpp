#include "poisonbench/defend/purify.hpp"

#include <algorithm>

namespace poisonbench {

void PurifyConfig::validate() const {
  if (mode == Mode::fixed_threshold && !(threshold >= -1.0 && threshold <= 1.0)) {
    throw ConfigError("purify: threshold must lie in [-1, 1]");
  }
  if (mode == Mode::quantile && !(quantile >= 0.0 && quantile < 1.0)) {
    throw ConfigError("purify: quantile must lie in [0, 1)");
  }
}

PurifyConfig PurifyConfig::for_budget(double structural_rate) {
  PurifyConfig cfg;
  if (structural_rate > 0.0 && structural_rate < 1.0) {
    cfg.mode = Mode::quantile;
    cfg.quantile = structural_rate;
  }
  return cfg;
}

double row_cosine(const Eigen::MatrixXd& emb, NodeId u, NodeId v) {
  const double denom = emb.row(u).norm() * emb.row(v).norm();
  return denom > 0 ? emb.row(u).dot(emb.row(v)) / denom : 0.0;
}

PurifyResult purify(const TextAttributedGraph& graph, const Eigen::MatrixXd& emb, const PurifyConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(emb.rows()) != graph.num_nodes()) {
    throw ValidationError("purify: embedding rows do not match the graph");
  }
  const auto& edges = graph.edges();
  std::vector<double> sim(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) sim[i] = row_cosine(emb, edges[i].u, edges[i].v);

  std::vector<bool> drop(edges.size(), false);
  if (cfg.mode == PurifyConfig::Mode::fixed_threshold) {
    for (std::size_t i = 0; i < edges.size(); ++i) drop[i] = sim[i] < cfg.threshold;
  } else {
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // edges are sorted by (u, v), so a stable sort keeps that order among equal scores
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] < sim[b]; });
    const std::size_t count = floor_fraction(cfg.quantile, edges.size());
    for (std::size_t i = 0; i < count; ++i) drop[order[i]] = true;
  }

  PurifyResult out;
  std::vector<Edge> kept;
  for (std::size_t i = 0; i < edges.size(); ++i) (drop[i] ? out.removed : kept).push_back(edges[i]);
  if (kept.empty() && !edges.empty()) out.warnings.push_back("purify: every edge was removed");
  out.graph = graph.with_edges(kept);
  return out;
}

}  // namespace poisonbench

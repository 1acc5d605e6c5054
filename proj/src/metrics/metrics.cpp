#include "poisonbench/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace poisonbench {

double rda(double acc_clean, double acc_attack) {
  if (!(acc_clean > 0)) throw ValidationError("rda: undefined for a clean accuracy of " + std::to_string(acc_clean));
  return 100.0 * (acc_clean - acc_attack) / acc_clean;
}

double edge_homophily(const TextAttributedGraph& graph, std::span<const ClassId> labels) {
  if (graph.num_edges() == 0) throw ValidationError("edge_homophily: graph has no edges");
  if (labels.size() != graph.num_nodes()) throw ValidationError("edge_homophily: label count mismatch");
  std::size_t same = 0;
  for (const Edge& e : graph.edges()) same += labels[e.u] == labels[e.v];
  return 100.0 * static_cast<double>(same) / static_cast<double>(graph.num_edges());
}

double neighbor_consistency(const Eigen::MatrixXd& emb, const TextAttributedGraph& graph,
                            std::vector<std::string>* warnings) {
  if (graph.num_edges() == 0) throw ValidationError("neighbor_consistency: graph has no edges");
  if (static_cast<std::size_t>(emb.rows()) != graph.num_nodes()) {
    throw ValidationError("neighbor_consistency: embedding rows do not match the graph");
  }
  const Eigen::VectorXd norms = emb.rowwise().norm();
  double total = 0.0;
  std::size_t zero_edges = 0;
  for (const Edge& e : graph.edges()) {
    const double denom = norms(e.u) * norms(e.v);
    if (denom == 0) {
      ++zero_edges;
      continue;
    }
    // cosine is symmetric, so both orientations of the edge contribute the same term
    total += 2.0 * emb.row(e.u).dot(emb.row(e.v)) / denom;
  }
  if (zero_edges && warnings) {
    warnings->push_back("neighbor_consistency: " + std::to_string(zero_edges) +
                        " edge(s) touch a zero embedding, cosine taken as 0");
  }
  return 100.0 * total / (2.0 * static_cast<double>(graph.num_edges()));
}

EsmiResult esmi(const Eigen::MatrixXd& emb, const TextAttributedGraph& graph, int bins, int num_clusters,
                std::uint64_t seed, std::vector<std::string>* warnings) {
  if (static_cast<std::size_t>(emb.rows()) != graph.num_nodes()) {
    throw ValidationError("esmi: embedding rows do not match the graph");
  }
  if (bins < 2) throw ConfigError("esmi: bins must be at least 2");
  if (num_clusters < 2) throw ConfigError("esmi: num_clusters must be at least 2");
  const auto cells = kmeans(emb, num_clusters, seed);
  const auto props = structural_properties(graph);
  EsmiResult out;
  for (std::size_t p = 0; p < StructuralProps::kNames.size(); ++p) {
    const auto& values = props.get(p);
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
      if (warnings) warnings->push_back("esmi: " + std::string(StructuralProps::kNames[p]) + " is constant, MI set to 0");
      out.per_property[p] = 0.0;
      continue;
    }
    out.per_property[p] = normalized_mutual_information(cells, quantile_bins(values, bins));
  }
  double sum = 0.0;
  for (double v : out.per_property) sum += v;
  out.mean = sum / static_cast<double>(out.per_property.size());
  return out;
}

MetricBundle embedding_metrics(const Eigen::MatrixXd& emb, const TextAttributedGraph& graph,
                               const MetricOptions& opts) {
  MetricBundle m;
  const auto& labels = graph.labels();
  const int classes = graph.num_classes();
  // each score is independent; one failing precondition should not hide the others
  auto guarded = [&](std::optional<double>& slot, auto&& compute) {
    try {
      slot = compute();
    } catch (const Error& e) {
      m.warnings.emplace_back(e.what());
    }
  };
  guarded(m.dbi, [&] { return davies_bouldin(emb, labels, classes); });
  guarded(m.silhouette, [&] { return silhouette(emb, labels, opts.silhouette_cap, opts.seed); });
  guarded(m.homophily_k, [&] { return embedding_homophily(emb, labels, opts.hom_k); });
  guarded(m.elmi, [&] { return elmi(emb, labels, std::max(2, classes), opts.seed, &m.warnings); });
  guarded(m.esmi, [&] { return esmi(emb, graph, opts.esmi_bins, std::max(2, classes), opts.seed, &m.warnings).mean; });
  guarded(m.ncon, [&] { return neighbor_consistency(emb, graph, &m.warnings); });
  return m;
}

}  // namespace poisonbench

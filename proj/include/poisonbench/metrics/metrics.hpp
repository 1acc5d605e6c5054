#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poisonbench/metrics/clustering.hpp"
#include "poisonbench/metrics/structural_props.hpp"
#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

/// Relative drop in accuracy, in percent: 100 (clean - attack) / clean. Negative when
/// the attack helps. Throws ValidationError when clean <= 0.
double rda(double acc_clean, double acc_attack);

/// Percentage of edges whose endpoints share a label. Requires at least one edge.
double edge_homophily(const TextAttributedGraph& graph, std::span<const ClassId> labels);
inline double edge_homophily(const TextAttributedGraph& graph) { return edge_homophily(graph, graph.labels()); }

/// Mean cosine similarity (x100) over both orientations of every edge. A zero row
/// makes that cosine 0 and adds a warning. Requires at least one edge.
double neighbor_consistency(const Eigen::MatrixXd& emb, const TextAttributedGraph& graph,
                            std::vector<std::string>* warnings = nullptr);

struct EsmiResult {
  double mean = 0.0;                   // over the four properties
  std::array<double, 4> per_property{};  // StructuralProps::kNames order
};

/// Normalized MI (x100) between k-means cells of the embedding (num_clusters cells)
/// and quantile bins of each structural property. Constant properties score 0 with
/// a warning and stay in the mean.
EsmiResult esmi(const Eigen::MatrixXd& emb, const TextAttributedGraph& graph, int bins, int num_clusters,
                std::uint64_t seed = 0, std::vector<std::string>* warnings = nullptr);

/// Scores attached to one report row. Percentages except dbi; MI scores are
/// normalized x100.
struct MetricBundle {
  std::optional<double> acc, rda, dbi, silhouette, homophily_k, elmi, esmi, ncon;
  std::vector<std::string> warnings;
};

struct MetricOptions {
  int hom_k = 10;
  int esmi_bins = 10;
  std::size_t silhouette_cap = 2000;
  std::uint64_t seed = 0;
};

/// Embedding-quality part of the bundle (dbi, sil, hom, elmi over labels; esmi, ncon
/// over `graph`). Scores whose preconditions fail are left empty with a warning.
MetricBundle embedding_metrics(const Eigen::MatrixXd& emb, const TextAttributedGraph& graph,
                               const MetricOptions& opts = {});

}  // namespace poisonbench

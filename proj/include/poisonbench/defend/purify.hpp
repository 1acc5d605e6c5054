#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

struct PurifyConfig {
  enum class Mode { fixed_threshold, quantile };
  Mode mode = Mode::fixed_threshold;
  double threshold = 0.1;  // cosine; edges strictly below are dropped
  double quantile = 0.0;   // fraction of lowest-similarity edges to drop

  void validate() const;
  /// Quantile mode at the structural budget when one is known, else a 0.1 threshold.
  static PurifyConfig for_budget(double structural_rate);
};

struct PurifyResult {
  TextAttributedGraph graph;
  std::vector<Edge> removed;
  std::vector<std::string> warnings;
};

/// Cosine similarity of two rows; 0 when either is the zero vector.
double row_cosine(const Eigen::MatrixXd& emb, NodeId u, NodeId v);

/// Drops edges whose endpoint embeddings are dissimilar. Quantile mode removes the
/// floor(q * |E|) least similar edges, ties going to the lower (u, v). Never adds edges.
PurifyResult purify(const TextAttributedGraph& graph, const Eigen::MatrixXd& emb, const PurifyConfig& cfg);

}  // namespace poisonbench

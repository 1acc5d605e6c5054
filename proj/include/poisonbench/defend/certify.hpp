#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/graph.hpp"
#include "poisonbench/victims/arch.hpp"
#include "poisonbench/victims/model.hpp"

namespace poisonbench {

/// Edge-deletion smoothing. Additions are not supported (p_add stays 0).
struct SmoothingConfig {
  double p_del = 0.4;
  double p_add = 0.0;
  std::size_t num_samples = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool base_correctness = false;  // judge correctness by the base prediction on the input graph

  void validate() const;
};

/// Each edge survives independently with probability 1 - p_del.
std::vector<Edge> sample_deleted_edges(std::span<const Edge> edges, double p_del, Rng& rng);
TextAttributedGraph sample_deleted_graph(const TextAttributedGraph& graph, double p_del, Rng& rng);

/// One-sided lower confidence bound: the alpha quantile of Beta(k, n - k + 1); 0 at k = 0
/// and alpha^(1/n) at k = n.
double clopper_pearson_lower(std::size_t k, std::size_t n, double alpha);

/// Largest r >= 0 with p_lower > 1 - p_del^r / 2, or 0 when none.
int certified_radius(double p_lower, double p_del);

/// Node classifier over edge sets of a fixed node set, as seen by the smoother.
class BaseClassifier {
 public:
  virtual ~BaseClassifier() = default;
  virtual std::size_t num_nodes() const = 0;
  virtual int num_classes() const = 0;
  /// Must be safe to call concurrently.
  virtual std::vector<ClassId> classify(std::span<const Edge> edges) const = 0;
};

/// A trained victim with fixed features.
class VictimClassifier final : public BaseClassifier {
 public:
  VictimClassifier(const VictimModel& model, const EmbeddingMatrix& features)
      : predictor_(model, features), classes_(model.num_classes) {}
  std::size_t num_nodes() const override { return predictor_.num_nodes(); }
  int num_classes() const override { return classes_; }
  std::vector<ClassId> classify(std::span<const Edge> edges) const override { return predictor_.classify(edges); }

 private:
  StructurePredictor predictor_;
  int classes_;
};

/// Per-node class tallies (rows follow `nodes`) over cfg.num_samples deletion samples.
/// Sample i draws from its own stream derive_seed(cfg.seed, i), so the tallies do not
/// depend on how samples are spread over threads.
std::vector<std::vector<std::size_t>> smoothed_counts(const BaseClassifier& clf, std::span<const Edge> edges,
                                                      std::span<const NodeId> nodes, const SmoothingConfig& cfg);

struct SmoothedPrediction {
  ClassId cls = 0;  // majority, ties to the lower class id
  std::size_t count = 0;
  double p_lower = 0.0;
};

SmoothedPrediction smoothed_predict(const BaseClassifier& clf, const TextAttributedGraph& graph, NodeId node,
                                    const SmoothingConfig& cfg);

struct NodeCertificate {
  NodeId node = 0;
  ClassId pred = 0;
  bool correct = false;
  std::size_t count = 0;
  double p_lower = 0.0;
  int radius = 0;
};

struct CertResult {
  std::vector<NodeCertificate> nodes;
  double ca = 0.0;                  // % correct with radius >= 1
  double mcr = 0.0;                 // mean radius, wrong nodes count 0
  double mcr_certified_only = 0.0;  // mean radius over correct nodes with radius >= 1
  SmoothingConfig config;
};

CertResult certify_set(const BaseClassifier& clf, const TextAttributedGraph& graph, std::span<const NodeId> nodes,
                       std::span<const ClassId> labels, const SmoothingConfig& cfg);

/// node,pred,correct,count,p_lower,radius
void write_certificate_csv(const CertResult& result, const std::filesystem::path& path);
nlohmann::json certificate_summary(const CertResult& result);

}  // namespace poisonbench

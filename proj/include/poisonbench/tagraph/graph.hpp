#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "poisonbench/common.hpp"

namespace poisonbench {

/// Undirected edge in canonical form (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge canonical(NodeId a, NodeId b) noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }
  auto operator<=>(const Edge&) const = default;
};

/// Counts of input irregularities repaired while building a graph.
struct BuildReport {
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

/// Text-attributed graph: simple undirected structure, one text and one label per node.
/// Immutable once built; derived graphs are produced through the with_* methods.
class TextAttributedGraph {
 public:
  TextAttributedGraph() = default;

  /// Validates and canonicalizes. Duplicate pairs collapse, self-loops are dropped
  /// and counted in `report` when given. Throws ValidationError on a bad endpoint,
  /// a size mismatch or a label outside [0, num_classes).
  static TextAttributedGraph build(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> pairs,
                                   std::vector<std::string> texts, std::vector<ClassId> labels,
                                   int num_classes, BuildReport* report = nullptr);

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  int num_classes() const noexcept { return num_classes_; }

  /// Sorted canonical edge list.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Sorted neighbor ids of `u`.
  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {adjacency_.data() + offsets_[u], adjacency_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const noexcept { return offsets_[u + 1] - offsets_[u]; }
  bool has_edge(NodeId a, NodeId b) const noexcept;

  const std::vector<std::string>& texts() const noexcept { return texts_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }

  /// Same nodes, texts and labels over a different edge set.
  TextAttributedGraph with_edges(std::span<const Edge> edges) const;
  /// Same structure and labels with replaced texts.
  TextAttributedGraph with_texts(std::vector<std::string> texts) const;

  bool operator==(const TextAttributedGraph&) const = default;

 private:
  void index_adjacency();

  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<std::string> texts_;
  std::vector<ClassId> labels_;
  int num_classes_ = 0;
};

}  // namespace poisonbench

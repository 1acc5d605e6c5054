#include "poisonbench/tagraph/graph.hpp"

#include <algorithm>

namespace poisonbench {

TextAttributedGraph TextAttributedGraph::build(std::size_t num_nodes,
                                               std::span<const std::pair<NodeId, NodeId>> pairs,
                                               std::vector<std::string> texts, std::vector<ClassId> labels,
                                               int num_classes, BuildReport* report) {
  if (texts.size() != num_nodes || labels.size() != num_nodes) {
    throw ValidationError("graph has " + std::to_string(num_nodes) + " nodes but " +
                          std::to_string(texts.size()) + " texts and " + std::to_string(labels.size()) +
                          " labels");
  }
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ValidationError("node " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                            " outside [0, " + std::to_string(num_classes) + ")");
    }
  }

  BuildReport local;
  TextAttributedGraph g;
  g.edges_.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a >= num_nodes || b >= num_nodes) {
      throw ValidationError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") references a node outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (a == b) {
      ++local.self_loops;
      continue;
    }
    g.edges_.push_back(Edge::canonical(a, b));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  const auto last = std::unique(g.edges_.begin(), g.edges_.end());
  local.duplicate_edges = static_cast<std::size_t>(g.edges_.end() - last);
  g.edges_.erase(last, g.edges_.end());

  g.texts_ = std::move(texts);
  g.labels_ = std::move(labels);
  g.num_classes_ = num_classes;
  g.index_adjacency();
  if (report) *report = local;
  return g;
}

void TextAttributedGraph::index_adjacency() {
  const std::size_t n = labels_.size();
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.assign(offsets_[n], 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[cursor[e.u]++] = e.v;
    adjacency_[cursor[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

bool TextAttributedGraph::has_edge(NodeId a, NodeId b) const noexcept {
  if (a >= num_nodes() || b >= num_nodes() || a == b) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

TextAttributedGraph TextAttributedGraph::with_edges(std::span<const Edge> edges) const {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edges.size());
  for (const Edge& e : edges) pairs.emplace_back(e.u, e.v);
  return build(num_nodes(), pairs, texts_, labels_, num_classes_);
}

TextAttributedGraph TextAttributedGraph::with_texts(std::vector<std::string> texts) const {
  if (texts.size() != num_nodes()) {
    throw ValidationError("replacement texts: expected " + std::to_string(num_nodes()) + ", got " +
                          std::to_string(texts.size()));
  }
  TextAttributedGraph g = *this;
  g.texts_ = std::move(texts);
  return g;
}

}  // namespace poisonbench

#include "poisonbench/tagraph/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace poisonbench {

void NodeSplit::validate(std::size_t num_nodes) const {
  if (train.empty()) throw ValidationError("split: train set is empty");
  std::vector<char> seen(num_nodes, 0);
  for (const auto* part : {&train, &val, &test}) {
    for (NodeId v : *part) {
      if (v >= num_nodes) throw ValidationError("split: node " + std::to_string(v) + " out of range");
      if (seen[v]) throw ValidationError("split: node " + std::to_string(v) + " appears twice");
      seen[v] = 1;
    }
  }
}

NodeSplit split_nodes(const TextAttributedGraph& graph, double train_frac, double val_frac, std::uint64_t seed) {
  if (train_frac < 0 || val_frac < 0 || train_frac + val_frac >= 1.0) {
    throw ConfigError("split: need train_frac, val_frac >= 0 and train_frac + val_frac < 1");
  }
  const std::size_t n = graph.num_nodes();
  const std::size_t n_train = floor_fraction(train_frac, n);
  const std::size_t n_val = floor_fraction(val_frac, n);
  if (n_train == 0) throw ConfigError("split: train fraction yields an empty train set for N=" + std::to_string(n));

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  NodeSplit split;
  const auto it = order.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(it + static_cast<std::ptrdiff_t>(n_train), it + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(it + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* part : {&split.train, &split.val, &split.test}) std::sort(part->begin(), part->end());
  return split;
}

TextAttributedGraph induced_subgraph(const TextAttributedGraph& graph, std::vector<NodeId> nodes) {
  std::sort(nodes.begin(), nodes.end());
  constexpr NodeId kAbsent = static_cast<NodeId>(-1);
  std::vector<NodeId> remap(graph.num_nodes(), kAbsent);
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[nodes[i]] = static_cast<NodeId>(i);

  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const Edge& e : graph.edges()) {
    if (remap[e.u] != kAbsent && remap[e.v] != kAbsent) pairs.emplace_back(remap[e.u], remap[e.v]);
  }
  std::vector<std::string> texts;
  std::vector<ClassId> labels;
  texts.reserve(nodes.size());
  labels.reserve(nodes.size());
  for (NodeId v : nodes) {
    texts.push_back(graph.texts()[v]);
    labels.push_back(graph.labels()[v]);
  }
  return TextAttributedGraph::build(nodes.size(), pairs, std::move(texts), std::move(labels),
                                    graph.num_classes());
}

TextAttributedGraph sample_subset(const TextAttributedGraph& graph, std::size_t seed_nodes, std::size_t fanout,
                                  std::size_t hops, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  if (seed_nodes == 0 || seed_nodes > n) throw ConfigError("sample_subset: seed_nodes must lie in [1, num_nodes]");
  if (hops < 1) throw ConfigError("sample_subset: hops must be >= 1");

  Rng rng(seed);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<char> kept(n, 0);
  std::vector<NodeId> frontier(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(seed_nodes));
  std::sort(frontier.begin(), frontier.end());
  for (NodeId v : frontier) kept[v] = 1;

  std::vector<NodeId> buffer;
  for (std::size_t hop = 0; hop < hops && !frontier.empty(); ++hop) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      auto nb = graph.neighbors(v);
      buffer.assign(nb.begin(), nb.end());
      if (buffer.size() > fanout) {
        // partial Fisher-Yates: the first `fanout` slots become a uniform sample
        for (std::size_t i = 0; i < fanout; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, buffer.size() - 1);
          std::swap(buffer[i], buffer[pick(rng)]);
        }
        buffer.resize(fanout);
      }
      for (NodeId u : buffer) {
        if (!kept[u]) {
          kept[u] = 1;
          next.push_back(u);
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }

  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < n; ++v) {
    if (kept[v]) nodes.push_back(v);
  }
  return induced_subgraph(graph, std::move(nodes));
}

}  // namespace poisonbench

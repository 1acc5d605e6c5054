#pragma once

#include <string>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

/// Stochastic-block-model text-attributed graph generator.
///
/// Classes are balanced and assigned by a seeded shuffle. The vocabulary is cut into
/// one disjoint slice per class plus a shared slice; each of a node's words comes from
/// its class slice with probability `class_word_skew`, otherwise from the shared slice.
struct SbmParams {
  std::size_t num_nodes = 1000;
  int num_classes = 5;
  double intra_edge_prob = 0.02;
  double inter_edge_prob = 0.002;
  std::size_t vocab_size = 600;
  std::size_t words_per_node = 20;
  double class_word_skew = 0.3;
  std::uint64_t seed = 0;

  /// Throws ConfigError listing the first violated constraint.
  void validate() const;
};

TextAttributedGraph generate_synthetic_tag(const SbmParams& params);

/// Pronounceable pseudo-word for vocabulary index `index` (at least four letters).
std::string synthetic_word(std::size_t index);

/// Expected edge homophily (fraction) of the block model described by `params`.
double expected_sbm_homophily(const SbmParams& params);

}  // namespace poisonbench

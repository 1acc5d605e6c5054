#include "poisonbench/tagraph/synthetic.hpp"

#include <algorithm>
#include <numeric>

namespace poisonbench {

void SbmParams::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (num_nodes < 1) throw ConfigError("sbm: num_nodes must be positive");
  if (num_classes < 1) throw ConfigError("sbm: num_classes must be positive");
  if (static_cast<std::size_t>(num_classes) > num_nodes) throw ConfigError("sbm: more classes than nodes");
  if (!prob(intra_edge_prob) || !prob(inter_edge_prob)) throw ConfigError("sbm: edge probabilities must lie in [0,1]");
  if (!prob(class_word_skew)) throw ConfigError("sbm: class_word_skew must lie in [0,1]");
  if (vocab_size < static_cast<std::size_t>(num_classes)) throw ConfigError("sbm: vocab_size must be >= num_classes");
}

std::string synthetic_word(std::size_t index) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  constexpr std::size_t base = consonants.size() * vowels.size();
  std::string word;
  std::size_t x = index;
  int syllables = 0;
  do {
    const std::size_t s = x % base;
    word += consonants[s / vowels.size()];
    word += vowels[s % vowels.size()];
    x /= base;
    ++syllables;
  } while (x > 0 || syllables < 2);
  return word;
}

double expected_sbm_homophily(const SbmParams& p) {
  const double n = static_cast<double>(p.num_nodes);
  const double c = static_cast<double>(p.num_classes);
  const double intra = p.intra_edge_prob * (n / c - 1.0);
  const double inter = p.inter_edge_prob * n * (c - 1.0) / c;
  return intra / (intra + inter);
}

TextAttributedGraph generate_synthetic_tag(const SbmParams& p) {
  p.validate();
  Rng rng(p.seed);
  const std::size_t n = p.num_nodes;
  const auto c = static_cast<std::size_t>(p.num_classes);

  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<ClassId>(i % c);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double prob = labels[i] == labels[j] ? p.intra_edge_prob : p.inter_edge_prob;
      if (unit(rng) < prob) pairs.emplace_back(i, j);
    }
  }

  const std::size_t slice = std::max<std::size_t>(1, p.vocab_size / (c + 1));
  const std::size_t shared_begin = slice * c;
  const std::size_t shared_size = p.vocab_size > shared_begin ? p.vocab_size - shared_begin : 0;
  std::vector<std::string> texts(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string& text = texts[i];
    for (std::size_t w = 0; w < p.words_per_node; ++w) {
      std::size_t index;
      if (unit(rng) < p.class_word_skew) {
        index = static_cast<std::size_t>(labels[i]) * slice +
                std::uniform_int_distribution<std::size_t>(0, slice - 1)(rng);
      } else if (shared_size > 0) {
        index = shared_begin + std::uniform_int_distribution<std::size_t>(0, shared_size - 1)(rng);
      } else {
        index = std::uniform_int_distribution<std::size_t>(0, p.vocab_size - 1)(rng);
      }
      if (w) text += ' ';
      text += synthetic_word(index);
    }
  }
  return TextAttributedGraph::build(n, pairs, std::move(texts), std::move(labels), p.num_classes);
}

}  // namespace poisonbench

#include "poisonbench/attacks/textual.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace poisonbench {

namespace {

constexpr std::size_t kMinEditableLength = 3;

struct Candidate {
  std::string op;
  std::size_t offset;  // inside the token
  std::string payload;
  std::string token;   // token text after the edit
};

std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::vector<Candidate> char_candidates(const std::string& tok) {
  std::vector<Candidate> out;
  const std::size_t len = tok.size();
  for (std::size_t p = 0; p + 1 < len; ++p) {
    if (tok[p] == tok[p + 1]) continue;
    std::string t = tok;
    std::swap(t[p], t[p + 1]);
    out.push_back({"swap", p, "", t});
  }
  for (std::size_t p = 0; p < len; ++p) {
    for (char ch = 'a'; ch <= 'z'; ++ch) {
      if (std::tolower(static_cast<unsigned char>(tok[p])) == ch) continue;
      std::string t = tok;
      t[p] = ch;
      out.push_back({"sub", p, std::string(1, ch), t});
    }
  }
  for (std::size_t p = 0; p < len; ++p) {
    std::string t = tok;
    t.erase(p, 1);
    out.push_back({"del", p, "", t});
  }
  for (std::size_t p = 0; p <= len; ++p) {
    for (char ch = 'a'; ch <= 'z'; ++ch) {
      std::string t = tok;
      t.insert(p, 1, ch);
      out.push_back({"ins", p, std::string(1, ch), t});
    }
  }
  return out;
}

// Shared greedy driver. `propose` lists replacement candidates for a token.
template <typename Propose>
TextAttackResult greedy_attack(std::span<const std::string> texts, std::span<const ClassId> labels,
                               const TextSurrogate& surrogate, int edits_per_node, std::uint64_t seed,
                               std::size_t min_length, Propose&& propose) {
  if (edits_per_node < 0) throw ConfigError("text attack: edits_per_node must be non-negative");
  if (labels.size() != texts.size()) throw ValidationError("text attack: label count does not match texts");
  TextAttackResult result;
  result.loss_traces.resize(texts.size());
  const auto& vocab = surrogate.vocab();
  for (NodeId node = 0; node < texts.size(); ++node) {
    std::string text = texts[node];
    const ClassId y = labels[node];
    Eigen::RowVectorXd z = surrogate.logits(text);
    double loss = TextSurrogate::loss_of(z, y);
    result.loss_traces[node].push_back(loss);
    if (edits_per_node == 0) continue;
    auto spans = tokenize_spans(text);
    if (spans.empty()) {
      result.notes.push_back("node " + std::to_string(node) + ": empty text skipped");
      continue;
    }

    std::vector<double> importance(spans.size(), 0.0);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const auto col = vocab.index(spans[i].token);
      if (col >= 0) importance[i] = TextSurrogate::loss_of(z - surrogate.weight_row(static_cast<std::size_t>(col)), y) - loss;
    }
    std::vector<std::size_t> order(spans.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });

    Rng rng(derive_seed(seed, node));
    int applied = 0;
    for (std::size_t idx : order) {
      if (applied >= edits_per_node) break;
      const TokenSpan& span = spans[idx];
      if (span.length < min_length) continue;
      const std::string raw = text.substr(span.begin, span.length);
      const auto old_col = vocab.index(span.token);
      Eigen::RowVectorXd base = z;
      if (old_col >= 0) base -= surrogate.weight_row(static_cast<std::size_t>(old_col));

      const std::vector<Candidate> cands = propose(raw);
      double best = loss;
      std::vector<std::size_t> ties;
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const auto col = vocab.index(lower(cands[c].token));
        const double l = col >= 0 ? TextSurrogate::loss_of(base + surrogate.weight_row(static_cast<std::size_t>(col)), y)
                                  : TextSurrogate::loss_of(base, y);
        if (l > best) {
          best = l;
          ties.assign(1, c);
        } else if (l == best && !ties.empty()) {
          ties.push_back(c);
        }
      }
      if (ties.empty()) continue;  // nothing strictly increases the loss
      std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
      const Candidate& chosen = cands[ties[pick(rng)]];
      TextEdit edit{node, chosen.op, span.begin + chosen.offset, chosen.payload};
      if (chosen.op == "word") edit.position = span.begin;
      result.edits.push_back(edit);
      text.replace(span.begin, span.length, chosen.token);
      z = surrogate.logits(text);
      loss = TextSurrogate::loss_of(z, y);
      result.loss_traces[node].push_back(loss);
      ++applied;
      // edits never split or merge tokens, so indices stay aligned
      spans = tokenize_spans(text);
    }
  }
  return result;
}

}  // namespace

TextAttackResult char_attack(std::span<const std::string> texts, std::span<const ClassId> labels,
                             const TextSurrogate& surrogate, int edits_per_node, std::uint64_t seed) {
  return greedy_attack(texts, labels, surrogate, edits_per_node, seed, kMinEditableLength, char_candidates);
}

TextAttackResult word_attack(std::span<const std::string> texts, std::span<const ClassId> labels,
                             const TextSurrogate& surrogate, const Vocabulary& vocab, int edits_per_node,
                             std::uint64_t seed, int top_k) {
  if (top_k < 1) throw ConfigError("word attack: top_k must be positive");
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k), vocab.size());
  auto propose = [&](const std::string& raw) {
    std::vector<Candidate> out;
    const std::string current = lower(raw);
    for (std::size_t c = 0; c < k; ++c) {
      if (vocab.token(c) != current) out.push_back({"word", 0, vocab.token(c), vocab.token(c)});
    }
    return out;
  };
  return greedy_attack(texts, labels, surrogate, edits_per_node, seed, 1, propose);
}

TextAttackResult random_char_attack(std::span<const std::string> texts, int edits_per_node, std::uint64_t seed) {
  if (edits_per_node < 0) throw ConfigError("text attack: edits_per_node must be non-negative");
  TextAttackResult result;
  result.loss_traces.resize(texts.size());
  for (NodeId node = 0; node < texts.size(); ++node) {
    if (edits_per_node == 0) continue;
    std::string text = texts[node];
    auto spans = tokenize_spans(text);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (spans[i].length >= kMinEditableLength) eligible.push_back(i);
    }
    if (eligible.empty()) {
      result.notes.push_back("node " + std::to_string(node) + ": no editable token");
      continue;
    }
    Rng rng(derive_seed(seed, node));
    std::shuffle(eligible.begin(), eligible.end(), rng);
    if (eligible.size() > static_cast<std::size_t>(edits_per_node)) eligible.resize(static_cast<std::size_t>(edits_per_node));
    for (std::size_t idx : eligible) {
      const TokenSpan& span = spans[idx];
      const auto cands = char_candidates(text.substr(span.begin, span.length));
      std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
      const Candidate& chosen = cands[pick(rng)];
      result.edits.push_back({node, chosen.op, span.begin + chosen.offset, chosen.payload});
      text.replace(span.begin, span.length, chosen.token);
      spans = tokenize_spans(text);
    }
  }
  return result;
}

std::vector<ClassId> text_attack_labels(std::span<const std::string> texts, std::span<const ClassId> truth,
                                        std::span<const NodeId> labeled, const TextSurrogate& surrogate) {
  std::vector<ClassId> out(texts.size());
  for (std::size_t v = 0; v < texts.size(); ++v) out[v] = surrogate.predict(texts[v]);
  for (NodeId v : labeled) out[v] = truth[v];
  return out;
}

PerturbationSet textual_attack(const TextAttributedGraph& graph, const NodeSplit& split, const std::string& kind,
                               const BudgetSpec& budget, std::uint64_t seed, int top_k) {
  budget.validate();
  split.validate(graph.num_nodes());
  PerturbationSet out;
  out.attack_name = kind;
  out.seed = seed;
  out.budget = budget;
  const auto& texts = graph.texts();
  TextAttackResult res;
  if (kind == "random_char") {
    res = random_char_attack(texts, budget.textual_edits_per_node, seed);
  } else if (kind == "char" || kind == "word") {
    Vocabulary vocab = build_vocab(texts, texts.size() * 64 + 1024, 1);
    const auto surrogate =
        TextSurrogate::train(texts, graph.labels(), split.train, vocab, graph.num_classes());
    const auto labels = text_attack_labels(texts, graph.labels(), split.train, surrogate);
    res = kind == "char" ? char_attack(texts, labels, surrogate, budget.textual_edits_per_node, seed)
                         : word_attack(texts, labels, surrogate, vocab, budget.textual_edits_per_node, seed, top_k);
  } else {
    throw ConfigError("textual attack: unknown kind '" + kind + "'");
  }
  // per-node RNG streams make dropping the labeled nodes afterwards equivalent to skipping them
  std::vector<bool> labeled(graph.num_nodes(), false);
  for (NodeId v : split.train) labeled[v] = true;
  for (auto& e : res.edits) {
    if (!labeled[e.node]) out.text_edits.push_back(std::move(e));
  }
  out.warnings = std::move(res.notes);
  return out;
}

}  // namespace poisonbench

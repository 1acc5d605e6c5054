#include "poisonbench/embed/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace poisonbench {

namespace {
bool is_token_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_token_char(text[i])) {
      ++i;
      continue;
    }
    TokenSpan span;
    span.begin = i;
    while (i < text.size() && is_token_char(text[i])) {
      span.token += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
      ++i;
    }
    span.length = i - span.begin;
    out.push_back(std::move(span));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& span : tokenize_spans(text)) out.push_back(std::move(span.token));
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw ValidationError("vocabulary: duplicate token " + tokens_[i]);
  }
}

std::ptrdiff_t Vocabulary::index(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Vocabulary build_vocab(std::span<const std::string> texts, std::size_t max_size, std::size_t min_df) {
  if (texts.empty()) throw ValidationError("build_vocab: no texts");
  std::map<std::string, std::size_t> df;
  bool any_token = false;
  for (const auto& text : texts) {
    auto toks = tokenize(text);
    any_token = any_token || !toks.empty();
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df[std::move(t)];
  }
  if (!any_token) throw ValidationError("build_vocab: all texts are empty");

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, count] : df) {
    if (count >= min_df) ranked.emplace_back(tok, count);
  }
  // map iteration is lexicographic, so a stable sort on frequency keeps the tie order
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);
  if (ranked.empty()) {
    throw ValidationError("build_vocab: vocabulary is empty after min_df=" + std::to_string(min_df) + " filter");
  }
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, count] : ranked) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

}  // namespace poisonbench

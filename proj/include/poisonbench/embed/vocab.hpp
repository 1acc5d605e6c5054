#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "poisonbench/common.hpp"

namespace poisonbench {

/// A token with its byte span inside the source text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::string token;  // lowercased
};

/// Lowercased maximal ASCII-alphanumeric runs; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);
std::vector<TokenSpan> tokenize_spans(std::string_view text);

/// Token -> dense column index. Ordered by descending document frequency,
/// ties by lexicographic token.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  /// Column of `token`, or -1 when out of vocabulary.
  std::ptrdiff_t index(std::string_view token) const;
  const std::string& token(std::size_t column) const { return tokens_.at(column); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Keeps tokens with document frequency >= min_df, then the `max_size` most frequent.
/// Throws ValidationError when every text is empty or nothing survives the filter.
Vocabulary build_vocab(std::span<const std::string> texts, std::size_t max_size, std::size_t min_df);

}  // namespace poisonbench

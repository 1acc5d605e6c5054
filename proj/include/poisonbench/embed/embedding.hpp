#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "poisonbench/embed/vocab.hpp"

namespace poisonbench {

/// N x d node feature matrix with a provenance tag: "bow", "tfidf" or "external:<name>".
/// Stored in 64-bit; models convert to 32-bit for training.
struct EmbeddingMatrix {
  Eigen::MatrixXd values;
  std::string provenance;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }

  /// Throws ValidationError with (row, col) of the first non-finite entry.
  void validate() const;
};

/// Raw token counts over vocabulary columns. Out-of-vocabulary tokens are ignored.
EmbeddingMatrix bow_embed(std::span<const std::string> texts, const Vocabulary& vocab);

/// tf * (ln((1+N)/(1+df)) + 1) with raw-count tf and df over `texts`, then L2 row
/// normalization (all-zero rows stay zero).
EmbeddingMatrix tfidf_embed(std::span<const std::string> texts, const Vocabulary& vocab);

/// Text matrix: header "N=<rows> d=<dim> name=<tag>", then N lines of d floats.
/// Throws ParseError on malformed text and ValidationError on shape mismatch or
/// non-finite values. `expected_rows` of 0 skips the row-count check.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t expected_rows);
void save_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path);

/// Scales every nonzero row to unit L2 norm.
EmbeddingMatrix l2_normalize_rows(EmbeddingMatrix emb);

}  // namespace poisonbench

#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "poisonbench/embed/vocab.hpp"

namespace poisonbench {

struct TextSurrogateConfig {
  double learning_rate = 0.05;
  int epochs = 300;
  double weight_decay = 1e-4;
};

/// Multinomial logistic regression on bag-of-words counts: the attacker's stand-in for
/// the text side of the victim.
class TextSurrogate {
 public:
  /// Adam from zero weights on the mean cross-entropy of `nodes`, reading labels[v]
  /// only for v in `nodes`.
  static TextSurrogate train(std::span<const std::string> texts, std::span<const ClassId> labels,
                             std::span<const NodeId> nodes, Vocabulary vocab, int num_classes,
                             const TextSurrogateConfig& cfg = {});

  const Vocabulary& vocab() const noexcept { return vocab_; }
  int num_classes() const noexcept { return static_cast<int>(bias_.size()); }
  /// Row of the weight matrix for vocabulary column `column`.
  auto weight_row(std::size_t column) const { return weight_.row(static_cast<Eigen::Index>(column)); }

  Eigen::RowVectorXd logits(std::string_view text) const;
  double loss(std::string_view text, ClassId label) const;
  ClassId predict(std::string_view text) const;

  /// Cross-entropy of a logit row: logsumexp(z) - z_label.
  static double loss_of(const Eigen::RowVectorXd& z, ClassId label);

 private:
  Vocabulary vocab_;
  Eigen::MatrixXd weight_;  // vocab x classes
  Eigen::RowVectorXd bias_;
};

}  // namespace poisonbench

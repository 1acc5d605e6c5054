#include "poisonbench/attacks/text_surrogate.hpp"

#include <cmath>

#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/victims/model.hpp"

namespace poisonbench {

TextSurrogate TextSurrogate::train(std::span<const std::string> texts, std::span<const ClassId> labels,
                                   std::span<const NodeId> nodes, Vocabulary vocab, int num_classes,
                                   const TextSurrogateConfig& cfg) {
  if (nodes.empty()) throw ConfigError("text surrogate: no labeled nodes");
  if (num_classes < 1) throw ConfigError("text surrogate: num_classes must be positive");
  if (vocab.empty()) throw ConfigError("text surrogate: empty vocabulary");
  if (labels.size() != texts.size()) throw ValidationError("text surrogate: label count does not match texts");

  std::vector<std::string> train_texts;
  for (NodeId v : nodes) train_texts.push_back(texts[v]);
  const Eigen::MatrixXd x = bow_embed(train_texts, vocab).values;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), num_classes);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const ClassId c = labels[nodes[i]];
    if (c < 0 || c >= num_classes) throw ValidationError("text surrogate: label out of range");
    y(static_cast<Eigen::Index>(i), c) = 1.0;
  }

  TextSurrogate s;
  s.vocab_ = std::move(vocab);
  s.weight_ = Eigen::MatrixXd::Zero(x.cols(), num_classes);
  s.bias_ = Eigen::RowVectorXd::Zero(num_classes);
  Eigen::MatrixXd m_w = s.weight_, v_w = s.weight_;
  Eigen::RowVectorXd m_b = s.bias_, v_b = s.bias_;
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const auto n = static_cast<double>(nodes.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Eigen::MatrixXd z = x * s.weight_;
    z.rowwise() += s.bias_;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      z.row(i) = (z.row(i).array() - z.row(i).maxCoeff()).exp();
      z.row(i) /= z.row(i).sum();
    }
    const Eigen::MatrixXd d = (z - y) / n;
    const Eigen::MatrixXd g_w = x.transpose() * d + cfg.weight_decay * s.weight_;
    const Eigen::RowVectorXd g_b = d.colwise().sum();
    const double c1 = 1.0 - std::pow(b1, epoch);
    const double c2 = 1.0 - std::pow(b2, epoch);
    m_w = b1 * m_w + (1 - b1) * g_w;
    v_w = b2 * v_w + (1 - b2) * g_w.cwiseAbs2();
    m_b = b1 * m_b + (1 - b1) * g_b;
    v_b = b2 * v_b + (1 - b2) * g_b.cwiseAbs2();
    s.weight_.array() -= cfg.learning_rate * (m_w.array() / c1) / ((v_w.array() / c2).sqrt() + eps);
    s.bias_.array() -= cfg.learning_rate * (m_b.array() / c1) / ((v_b.array() / c2).sqrt() + eps);
  }
  return s;
}

Eigen::RowVectorXd TextSurrogate::logits(std::string_view text) const {
  Eigen::RowVectorXd z = bias_;
  for (const auto& token : tokenize(text)) {
    const auto col = vocab_.index(token);
    if (col >= 0) z += weight_.row(col);
  }
  return z;
}

double TextSurrogate::loss_of(const Eigen::RowVectorXd& z, ClassId label) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum()) - z(label);
}

double TextSurrogate::loss(std::string_view text, ClassId label) const { return loss_of(logits(text), label); }

ClassId TextSurrogate::predict(std::string_view text) const { return argmax_row(logits(text)); }

}  // namespace poisonbench

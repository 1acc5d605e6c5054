#include "poisonbench/victims/model.hpp"

#include <cmath>

namespace poisonbench {

std::string to_string(GnnKind kind) {
  switch (kind) {
    case GnnKind::gcn: return "gcn";
    case GnnKind::gat: return "gat";
    case GnnKind::sage: return "sage";
  }
  return "?";
}

GnnKind parse_gnn_kind(std::string_view name) {
  if (name == "gcn") return GnnKind::gcn;
  if (name == "gat") return GnnKind::gat;
  if (name == "sage" || name == "graphsage") return GnnKind::sage;
  throw ConfigError("unknown architecture '" + std::string(name) + "' (expected gcn, gat or sage)");
}

void GnnArch::validate() const {
  if (layers != 2) throw ConfigError("arch: only two-layer victims are supported");
  if (hidden < 1) throw ConfigError("arch: hidden must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("arch: dropout must lie in [0,1)");
  if (kind == GnnKind::gat) {
    if (heads_layer1 < 1 || heads_layer2 < 1) throw ConfigError("arch: gat heads must be positive");
    if (hidden % heads_layer1 != 0) throw ConfigError("arch: hidden must be divisible by heads_layer1");
  }
  if (kind == GnnKind::sage && sage_aggregator != "mean") {
    throw ConfigError("arch: only the mean aggregator is supported for sage");
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be >= 0");
  if (early_stop_patience < 1) throw ConfigError("train: early_stop_patience must be >= 1");
}

double accuracy_of(std::span<const ClassId> predicted, std::span<const ClassId> labels,
                   std::span<const NodeId> nodes) {
  if (nodes.empty()) throw ConfigError("accuracy: empty node set");
  std::size_t correct = 0;
  for (NodeId v : nodes) correct += predicted[v] == labels[v] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

namespace {

std::vector<ClassId> argmax_all(const Matrix<float>& logits) {
  std::vector<ClassId> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_row(logits.row(i));
  return out;
}

void check_shapes(const TextAttributedGraph& graph, const EmbeddingMatrix& features) {
  if (features.rows() != graph.num_nodes()) {
    throw ValidationError("features have " + std::to_string(features.rows()) + " rows, graph has " +
                          std::to_string(graph.num_nodes()) + " nodes");
  }
}

struct AdamState {
  ParameterList<float> m, v;
  int step = 0;
};

void adam_step(ParameterList<float>& params, const ParameterList<float>& grads, AdamState& st, double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++st.step;
  const float c1 = static_cast<float>(1.0 - std::pow(beta1, st.step));
  const float c2 = static_cast<float>(1.0 - std::pow(beta2, st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = st.m[i].value;
    auto& v = st.v[i].value;
    const auto& g = grads[i].value;
    m = static_cast<float>(beta1) * m + static_cast<float>(1 - beta1) * g;
    v = static_cast<float>(beta2) * v + static_cast<float>(1 - beta2) * g.cwiseProduct(g);
    params[i].value.array() -= static_cast<float>(lr) * (m.array() / c1) /
                                ((v.array() / c2).sqrt() + static_cast<float>(eps));
  }
}

}  // namespace

VictimModel train_gnn(const GnnArch& arch, const TextAttributedGraph& graph, const EmbeddingMatrix& features,
                      const NodeSplit& split, const TrainConfig& cfg) {
  arch.validate();
  cfg.validate();
  check_shapes(graph, features);
  split.validate(graph.num_nodes());

  const auto ops = GraphOperators<float>::build(arch.kind, graph.num_nodes(), graph.edges());
  const FeatureInput<float> x(features.values);
  const auto& labels = graph.labels();

  VictimModel model;
  model.arch = arch;
  model.input_dim = features.dim();
  model.num_classes = graph.num_classes();
  model.seed = cfg.seed;
  model.parameters = init_parameters<float>(arch, features.dim(), graph.num_classes(), cfg.seed);

  Rng dropout_rng(derive_seed(cfg.seed, 1));
  AdamState adam{zeros_like(model.parameters), zeros_like(model.parameters)};
  ParameterList<float> best = model.parameters;
  double best_val = -1.0;
  int since_best = 0;
  const float wd = static_cast<float>(cfg.weight_decay);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ForwardCache<float> cache;
    const Matrix<float> logits = forward<float>(arch, ops, x, model.parameters, &dropout_rng, &cache);
    Matrix<float> d_logits;
    const float loss = cross_entropy<float>(logits, labels, split.train, &d_logits);
    if (!std::isfinite(loss)) throw DivergenceError(epoch, "non-finite training loss");
    auto grads = zeros_like(model.parameters);
    backward<float>(arch, ops, x, model.parameters, cache, d_logits, grads);
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i].value += wd * model.parameters[i].value;
    adam_step(model.parameters, grads, adam, cfg.learning_rate);
    model.epochs_trained = epoch + 1;

    if (split.val.empty()) continue;
    const auto eval_logits = forward<float>(arch, ops, x, model.parameters, nullptr, nullptr);
    const double val = accuracy_of(argmax_all(eval_logits), labels, split.val);
    if (val > best_val) {
      best_val = val;
      best = model.parameters;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  if (!split.val.empty()) {
    model.parameters = std::move(best);
    model.val_accuracy = best_val;
  }
  return model;
}

Prediction predict(const VictimModel& model, const TextAttributedGraph& graph, const EmbeddingMatrix& features) {
  check_shapes(graph, features);
  if (features.dim() != model.input_dim) throw ValidationError("predict: feature dimension differs from model");
  const auto ops = GraphOperators<float>::build(model.arch.kind, graph.num_nodes(), graph.edges());
  const FeatureInput<float> x(features.values);
  const Matrix<float> logits = forward<float>(model.arch, ops, x, model.parameters, nullptr, nullptr);
  Prediction out;
  out.classes = argmax_all(logits);
  out.probabilities = softmax_rows<double>(logits.cast<double>());
  return out;
}

double evaluate_accuracy(const VictimModel& model, const TextAttributedGraph& graph,
                         const EmbeddingMatrix& features, std::span<const NodeId> nodes) {
  const auto pred = predict(model, graph, features);
  return accuracy_of(pred.classes, graph.labels(), nodes);
}

StructurePredictor::StructurePredictor(const VictimModel& model, const EmbeddingMatrix& features)
    : model_(&model), num_nodes_(features.rows()) {
  if (features.dim() != model.input_dim) throw ValidationError("predictor: feature dimension differs from model");
  const FeatureInput<float> x(features.values);
  first_ = first_transform<float>(model.arch, x, model.parameters);
}

std::vector<ClassId> StructurePredictor::classify(std::span<const Edge> edges) const {
  const auto ops = GraphOperators<float>::build(model_->arch.kind, num_nodes_, edges);
  return argmax_all(forward_from_transform<float>(model_->arch, ops, first_, model_->parameters, nullptr, nullptr));
}

}  // namespace poisonbench

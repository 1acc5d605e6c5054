#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "poisonbench/common.hpp"

namespace poisonbench {

enum class GnnKind { gcn, gat, sage };

std::string to_string(GnnKind kind);
/// Throws ConfigError on an unknown name.
GnnKind parse_gnn_kind(std::string_view name);

/// Victim architecture. Defaults: two layers, 256 hidden units, dropout 0.5,
/// GAT with 8 concatenated heads then 1 averaged head, mean-aggregating SAGE.
struct GnnArch {
  GnnKind kind = GnnKind::gcn;
  int layers = 2;
  int hidden = 256;
  double dropout = 0.5;
  int heads_layer1 = 8;
  int heads_layer2 = 1;
  std::string sage_aggregator = "mean";

  void validate() const;
  bool operator==(const GnnArch&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 300;
  double weight_decay = 5e-4;
  int early_stop_patience = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Dense node-by-feature matrices are row-major so per-node rows are contiguous.
template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
struct NamedTensor {
  std::string name;
  Matrix<S> value;
};

template <typename S>
using ParameterList = std::vector<NamedTensor<S>>;

/// A trained victim: architecture, float32 weights and provenance of the run.
struct VictimModel {
  GnnArch arch;
  std::size_t input_dim = 0;
  int num_classes = 0;
  std::uint64_t seed = 0;
  double val_accuracy = 0.0;
  int epochs_trained = 0;
  ParameterList<float> parameters;
};

}  // namespace poisonbench

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "poisonbench/bench/config.hpp"
#include "poisonbench/bench/report.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/embed/vocab.hpp"
#include "poisonbench/tagraph/sampling.hpp"

namespace poisonbench {

/// Dataset, split and features of an experiment, ready for attacks and training.
struct PreparedData {
  TextAttributedGraph graph;
  NodeSplit split;
  Vocabulary vocab;  // bow and tfidf only
  EmbeddingMatrix features;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

/// Features of `graph` (a perturbed copy of data.graph): recomputed from its texts over
/// the clean vocabulary, or the clean features when the texts are unchanged.
EmbeddingMatrix features_for(const ExperimentConfig& cfg, const PreparedData& data, const TextAttributedGraph& graph);

/// Purification settings for an attack, following cfg.defense.
PurifyConfig purify_config_for(const DefenseSpec& defense, const AttackSpec& spec);

/// Worker count: POISONBENCH_THREADS when set and positive, else the hardware count.
unsigned worker_threads();

struct ExperimentOptions {
  unsigned threads = 0;  // 0: worker_threads()
  /// When set, every perturbation set is written here as <attack>_<budget>_seed<s>.json.
  std::optional<std::filesystem::path> perturbation_dir;
  std::function<void(const std::string&)> log;  // progress lines; may be called from workers
};

/// Runs the pipeline: prepare data, poison, train clean and poisoned victims, evaluate,
/// and optionally purify and certify. Clean victims are trained once per (victim, seed);
/// every attack row trains a fresh victim on the poisoned data. Failures are recorded on
/// their rows and the run continues. Rows come out in a fixed order whatever the thread
/// count: clean rows, then per attack entry, seed and victim the attack row followed by
/// its purified row.
RobustnessReport run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opts = {});

}  // namespace poisonbench

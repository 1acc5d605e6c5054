#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poisonbench/attacks/combined.hpp"
#include "poisonbench/defend/certify.hpp"
#include "poisonbench/defend/purify.hpp"
#include "poisonbench/metrics/metrics.hpp"
#include "poisonbench/tagraph/synthetic.hpp"
#include "poisonbench/victims/arch.hpp"

namespace poisonbench {

struct DatasetSpec {
  std::string name = "sbm";
  std::optional<SbmParams> sbm;          // generate in memory
  std::optional<std::filesystem::path> path;  // or load a saved graph directory
  double train_frac = 0.1;
  double val_frac = 0.1;
  std::uint64_t split_seed = 0;
};

struct EmbeddingSpec {
  std::string kind = "bow";  // bow, tfidf or external
  std::optional<std::filesystem::path> path;
  bool normalize = false;
  std::size_t max_vocab = 5000;
  std::size_t min_df = 1;
};

struct AttackEntry {
  AttackSpec spec;                            // seed is filled in per run
  std::vector<std::uint64_t> seeds;           // empty: the experiment seeds
  std::optional<std::uint64_t> target_seed;   // empty: the run seed
};

struct DefenseSpec {
  bool enabled = false;
  std::string mode = "auto";  // auto (budget-matched quantile), threshold or quantile
  double threshold = 0.1;
  double quantile = 0.1;
};

struct CertificationSpec {
  bool enabled = false;
  SmoothingConfig smoothing;
  std::size_t max_nodes = 200;  // evaluated nodes certified per row, lowest ids first
};

struct MetricsSpec {
  bool enabled = true;
  MetricOptions options;
};

/// One experiment: a dataset, an embedding, victims x seeds, attacks x seeds, and the
/// optional defense and certification stages.
struct ExperimentConfig {
  DatasetSpec dataset;
  EmbeddingSpec embedding;
  std::vector<GnnArch> victims;
  TrainConfig train;  // seed is replaced by each experiment seed
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<AttackEntry> attacks;
  DefenseSpec defense;
  CertificationSpec certification;
  MetricsSpec metrics;
  std::filesystem::path output_dir = "poisonbench-out";

  /// Throws ConfigError listing every violation found.
  void validate() const;
};

/// Parses and validates. Unknown keys are rejected so typos do not pass silently.
/// Relative dataset and embedding paths are resolved against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Reads a config file; relative paths inside it are taken from the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Attack seeds of an entry: its own list, or the experiment seeds.
std::vector<std::uint64_t> attack_seeds(const AttackEntry& entry, const ExperimentConfig& cfg);
/// The spec an entry runs with for one seed.
AttackSpec spec_for_seed(const AttackEntry& entry, std::uint64_t seed);

nlohmann::json attack_spec_to_json(const AttackSpec& spec);
/// Parses an attack object (name, rate or per_target, text_edits, options). The budget
/// mode follows from the attack name.
AttackSpec attack_spec_from_json(const nlohmann::json& j);

nlohmann::json sbm_to_json(const SbmParams& p);
SbmParams sbm_from_json(const nlohmann::json& j);

/// Human-readable budget of an attack spec, e.g. "rate=0.2", "per_target=5", "edits=3".
std::string budget_label(const AttackSpec& spec);
/// The number the budget axis of plots uses: rate, flips per target or edits per node.
double budget_value(const AttackSpec& spec);

}  // namespace poisonbench

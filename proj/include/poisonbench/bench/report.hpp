#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace poisonbench {

/// One measured victim. Clean baselines use attack "clean"; defended rows append
/// "+purify" to the attack name.
struct ReportRow {
  std::string dataset;
  std::string embedding;
  std::string arch;
  std::string attack;
  std::string budget_label;  // e.g. rate=0.2 or per_target=5,edits=3
  double budget = 0.0;       // numeric budget axis
  std::uint64_t seed = 0;
  std::string eval_set = "test";  // test, or targets for per-target attacks
  std::optional<double> acc_clean, acc_attack, rda;
  std::optional<double> dbi, sil, hom, elmi, esmi, ncon;
  std::optional<double> ca, mcr;
  double wall_ms = 0.0;
  std::string perturbation_hash;  // empty for clean rows
  std::size_t removed_edges = 0;  // purified rows only
  std::optional<std::string> error;
  std::vector<std::string> warnings;

  bool operator==(const ReportRow&) const = default;
};

struct RobustnessReport {
  nlohmann::json config;
  std::vector<ReportRow> rows;

  /// FNV-1a over the rows and the config, leaving out wall-clock times, the output
  /// directory and thread counts so reruns of one config hash identically.
  std::string content_hash() const;
  bool operator==(const RobustnessReport&) const = default;
};

inline constexpr std::string_view kReportCsvHeader =
    "dataset,embedding,arch,attack,budget,seed,acc_clean,acc_attack,rda,dbi,sil,hom,elmi,esmi,ncon,ca,mcr,wall_ms";

nlohmann::json to_json(const ReportRow& row);
ReportRow report_row_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RobustnessReport& report);
/// Inverse of to_json; checks the stored content hash.
RobustnessReport report_from_json(const nlohmann::json& j);

/// CSV text: the fixed header, then one line per row; empty fields for absent values,
/// numbers with 17 significant digits.
std::string report_csv(const RobustnessReport& report);

enum class ReportFormat { csv, json };

/// Writes report.csv and/or report.json into `dir`, plus plots/ with two-column CSVs
/// (budget vs accuracy and budget vs RDA) per attack and architecture. Throws
/// ValidationError on an empty report.
void emit_report(const RobustnessReport& report, const std::filesystem::path& dir,
                 const std::vector<ReportFormat>& formats = {ReportFormat::csv, ReportFormat::json});

RobustnessReport load_report(const std::filesystem::path& json_path);

}  // namespace poisonbench

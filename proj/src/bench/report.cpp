#include "poisonbench/bench/report.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>

#include "poisonbench/common.hpp"

namespace poisonbench {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

json hashable(const RobustnessReport& report) {
  json cfg = report.config;
  if (cfg.is_object()) {
    cfg.erase("output_dir");
    if (cfg.contains("certification") && cfg["certification"].is_object()) cfg["certification"].erase("threads");
  }
  json rows = json::array();
  for (const auto& r : report.rows) {
    json j = to_json(r);
    j.erase("wall_ms");
    rows.push_back(std::move(j));
  }
  return {{"config", cfg}, {"rows", rows}};
}

}  // namespace

json to_json(const ReportRow& r) {
  json metrics = {{"dbi", opt(r.dbi)},   {"sil", opt(r.sil)},   {"hom", opt(r.hom)},
                  {"elmi", opt(r.elmi)}, {"esmi", opt(r.esmi)}, {"ncon", opt(r.ncon)}};
  return {{"dataset", r.dataset},
          {"embedding", r.embedding},
          {"arch", r.arch},
          {"attack", r.attack},
          {"budget_label", r.budget_label},
          {"budget", r.budget},
          {"seed", r.seed},
          {"eval_set", r.eval_set},
          {"acc_clean", opt(r.acc_clean)},
          {"acc_attack", opt(r.acc_attack)},
          {"rda", opt(r.rda)},
          {"metrics", metrics},
          {"ca", opt(r.ca)},
          {"mcr", opt(r.mcr)},
          {"wall_ms", r.wall_ms},
          {"perturbation_hash", r.perturbation_hash},
          {"removed_edges", r.removed_edges},
          {"error", r.error ? json(*r.error) : json(nullptr)},
          {"warnings", r.warnings}};
}

ReportRow report_row_from_json(const json& j) {
  ReportRow r;
  r.dataset = j.at("dataset").get<std::string>();
  r.embedding = j.at("embedding").get<std::string>();
  r.arch = j.at("arch").get<std::string>();
  r.attack = j.at("attack").get<std::string>();
  r.budget_label = j.value("budget_label", std::string());
  r.budget = j.at("budget").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.eval_set = j.value("eval_set", std::string("test"));
  r.acc_clean = get_opt(j, "acc_clean");
  r.acc_attack = get_opt(j, "acc_attack");
  r.rda = get_opt(j, "rda");
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    r.dbi = get_opt(m, "dbi");
    r.sil = get_opt(m, "sil");
    r.hom = get_opt(m, "hom");
    r.elmi = get_opt(m, "elmi");
    r.esmi = get_opt(m, "esmi");
    r.ncon = get_opt(m, "ncon");
  }
  r.ca = get_opt(j, "ca");
  r.mcr = get_opt(j, "mcr");
  r.wall_ms = j.value("wall_ms", 0.0);
  r.perturbation_hash = j.value("perturbation_hash", std::string());
  r.removed_edges = j.value("removed_edges", std::size_t{0});
  if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

std::string RobustnessReport::content_hash() const { return fnv1a_hex(hashable(*this).dump()); }

json to_json(const RobustnessReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(to_json(r));
  return {{"format", "poisonbench-report/1"},
          {"conventions",
           {{"accuracy", "percent of evaluated nodes"},
            {"rda", "(acc_clean - acc_attack) / acc_clean * 100"},
            {"mutual_information", "normalized, MI / min(H) * 100"},
            {"silhouette", "x100"},
            {"hom", "percent of k nearest embedding neighbours sharing the label"},
            {"hyperparameters", "victims train with the configured values; no grid search is run"}}},
          {"config", report.config},
          {"rows", rows},
          {"content_hash", report.content_hash()}};
}

RobustnessReport report_from_json(const json& j) {
  RobustnessReport report;
  report.config = j.value("config", json::object());
  for (const auto& r : j.at("rows")) report.rows.push_back(report_row_from_json(r));
  if (j.contains("content_hash") && j.at("content_hash").get<std::string>() != report.content_hash()) {
    throw ValidationError("report: content hash does not match its rows");
  }
  return report;
}

std::string report_csv(const RobustnessReport& report) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : report.rows) {
    const std::string fields[] = {csv_field(r.dataset), csv_field(r.embedding), csv_field(r.arch), csv_field(r.attack),
                                  num(r.budget),        std::to_string(r.seed),  num(r.acc_clean),   num(r.acc_attack),
                                  num(r.rda),           num(r.dbi),              num(r.sil),         num(r.hom),
                                  num(r.elmi),          num(r.esmi),             num(r.ncon),        num(r.ca),
                                  num(r.mcr),           num(r.wall_ms)};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  }
  return out;
}

void emit_report(const RobustnessReport& report, const fs::path& dir, const std::vector<ReportFormat>& formats) {
  if (report.rows.empty()) throw ValidationError("report: no rows to write");
  fs::create_directories(dir);
  for (auto f : formats) {
    if (f == ReportFormat::csv) {
      std::ofstream(dir / "report.csv", std::ios::binary) << report_csv(report);
    } else {
      std::ofstream(dir / "report.json", std::ios::binary) << to_json(report).dump(2) << '\n';
    }
  }

  // one file per (attack, arch, quantity); every seed contributes a line so box plots work
  std::map<std::string, std::string> plots;
  for (const auto& r : report.rows) {
    if (r.error) continue;
    const std::string stem = file_safe(r.attack + "_" + r.arch);
    if (r.acc_attack) plots[stem + "_acc.csv"] += num(r.budget) + "," + num(*r.acc_attack) + "\n";
    if (r.rda) plots[stem + "_rda.csv"] += num(r.budget) + "," + num(*r.rda) + "\n";
  }
  if (plots.empty()) return;
  fs::create_directories(dir / "plots");
  for (const auto& [name, body] : plots) {
    const bool acc = name.ends_with("_acc.csv");
    std::ofstream(dir / "plots" / name, std::ios::binary) << (acc ? "budget,acc\n" : "budget,rda\n") << body;
  }
}

RobustnessReport load_report(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error("cannot open " + json_path.string());
  try {
    return report_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(json_path.string(), 0, e.what());
  }
}

}  // namespace poisonbench

#include "poisonbench/bench/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "poisonbench/victims/serialize.hpp"

namespace poisonbench {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Accumulates every problem so one run reports all of them.
struct Problems {
  std::vector<std::string> items;
  void add(std::string msg) {
    // parse-time and validation checks can find the same thing
    if (std::find(items.begin(), items.end(), msg) == items.end()) items.push_back(std::move(msg));
  }
  void throw_if_any() const {
    if (items.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& m : items) msg += "\n  - " + m;
    throw ConfigError(msg);
  }
};

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where,
                Problems& problems) {
  if (!j.is_object()) {
    problems.add(where + ": expected an object");
    return;
  }
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) problems.add(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where, Problems& problems) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    problems.add(where + "." + key + ": wrong type");
  }
}

template <typename Fn>
void guarded(const std::string& where, Problems& problems, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    problems.add(where + ": " + e.what());
  } catch (const json::exception& e) {
    problems.add(where + ": " + e.what());
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_relative() && !base.empty() ? base / p : p; }

bool per_target_attack(const std::string& name) { return name == "targeted" || name == "random_rewire"; }

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

AttackSpec parse_attack(const json& j, const std::string& where, Problems& problems) {
  check_keys(j,
             {"name", "rate", "per_target", "text_edits", "seeds", "oracle_labels", "target_min_degree",
              "target_sample_rate", "target_seed", "word_top_k", "structural", "textual", "meta"},
             where, problems);
  AttackSpec spec;
  read(j, "name", spec.name, where, problems);
  if (spec.name.empty()) problems.add(where + ": missing name");
  read(j, "structural", spec.structural, where, problems);
  read(j, "textual", spec.textual, where, problems);
  const std::string& structural = spec.name == "combined" ? spec.structural : spec.name;
  if (per_target_attack(structural)) {
    spec.budget.structural_mode = StructuralMode::per_target;
    if (j.contains("rate")) problems.add(where + ": " + structural + " takes per_target, not rate");
    read(j, "per_target", spec.budget.per_target, where, problems);
  } else {
    if (j.contains("per_target")) problems.add(where + ": " + spec.name + " takes rate, not per_target");
    read(j, "rate", spec.budget.global_rate, where, problems);
  }
  read(j, "text_edits", spec.budget.textual_edits_per_node, where, problems);
  const bool has_text = is_textual_attack(spec.name) || spec.name == "combined";
  if (has_text && j.is_object() && !j.contains("text_edits")) spec.budget.textual_edits_per_node = 3;
  read(j, "oracle_labels", spec.oracle_labels, where, problems);
  read(j, "target_min_degree", spec.target_min_degree, where, problems);
  read(j, "target_sample_rate", spec.target_sample_rate, where, problems);
  read(j, "word_top_k", spec.word_top_k, where, problems);
  if (j.contains("meta")) {
    const auto& m = j.at("meta");
    check_keys(m, {"inner_steps", "inner_lr", "momentum", "weight_decay"}, where + ".meta", problems);
    read(m, "inner_steps", spec.meta.inner_steps, where + ".meta", problems);
    read(m, "inner_lr", spec.meta.inner_lr, where + ".meta", problems);
    read(m, "momentum", spec.meta.momentum, where + ".meta", problems);
    read(m, "weight_decay", spec.meta.weight_decay, where + ".meta", problems);
  }
  guarded(where, problems, [&] { spec.validate(); });
  if (!(spec.target_sample_rate > 0.0 && spec.target_sample_rate <= 1.0)) {
    problems.add(where + ": target_sample_rate must lie in (0, 1]");
  }
  return spec;
}

}  // namespace

json sbm_to_json(const SbmParams& p) {
  return {{"num_nodes", p.num_nodes},           {"num_classes", p.num_classes},
          {"intra_edge_prob", p.intra_edge_prob}, {"inter_edge_prob", p.inter_edge_prob},
          {"vocab_size", p.vocab_size},         {"words_per_node", p.words_per_node},
          {"class_word_skew", p.class_word_skew}, {"seed", p.seed}};
}

SbmParams sbm_from_json(const json& j) {
  Problems problems;
  check_keys(j,
             {"num_nodes", "num_classes", "intra_edge_prob", "inter_edge_prob", "vocab_size", "words_per_node",
              "class_word_skew", "seed"},
             "sbm", problems);
  SbmParams p;
  read(j, "num_nodes", p.num_nodes, "sbm", problems);
  read(j, "num_classes", p.num_classes, "sbm", problems);
  read(j, "intra_edge_prob", p.intra_edge_prob, "sbm", problems);
  read(j, "inter_edge_prob", p.inter_edge_prob, "sbm", problems);
  read(j, "vocab_size", p.vocab_size, "sbm", problems);
  read(j, "words_per_node", p.words_per_node, "sbm", problems);
  read(j, "class_word_skew", p.class_word_skew, "sbm", problems);
  read(j, "seed", p.seed, "sbm", problems);
  guarded("sbm", problems, [&] { p.validate(); });
  problems.throw_if_any();
  return p;
}

json attack_spec_to_json(const AttackSpec& spec) {
  json j = {{"name", spec.name}};
  if (spec.budget.structural_mode == StructuralMode::per_target) {
    j["per_target"] = spec.budget.per_target;
  } else {
    j["rate"] = spec.budget.global_rate;
  }
  j["text_edits"] = spec.budget.textual_edits_per_node;
  j["oracle_labels"] = spec.oracle_labels;
  j["target_min_degree"] = spec.target_min_degree;
  j["target_sample_rate"] = spec.target_sample_rate;
  j["word_top_k"] = spec.word_top_k;
  if (spec.name == "combined") {
    j["structural"] = spec.structural;
    j["textual"] = spec.textual;
  }
  j["meta"] = {{"inner_steps", spec.meta.inner_steps},
               {"inner_lr", spec.meta.inner_lr},
               {"momentum", spec.meta.momentum},
               {"weight_decay", spec.meta.weight_decay}};
  return j;
}

AttackSpec attack_spec_from_json(const json& j) {
  Problems problems;
  AttackSpec spec = parse_attack(j, "attack", problems);
  problems.throw_if_any();
  return spec;
}

namespace {

void collect_problems(const ExperimentConfig& c, Problems& problems) {
  const auto& [dataset, embedding, victims, train, seeds, attacks, defense, certification, metrics, output_dir] = c;
  if (dataset.sbm.has_value() == dataset.path.has_value()) {
    problems.add("dataset: give exactly one of sbm or path");
  }
  if (dataset.sbm) guarded("dataset.sbm", problems, [&] { dataset.sbm->validate(); });
  if (dataset.path && !fs::is_directory(*dataset.path)) {
    problems.add("dataset.path: no such directory " + dataset.path->string());
  }
  if (!(dataset.train_frac > 0.0 && dataset.val_frac >= 0.0 && dataset.train_frac + dataset.val_frac < 1.0)) {
    problems.add("dataset: need train_frac > 0, val_frac >= 0 and train_frac + val_frac < 1");
  }
  if (embedding.kind != "bow" && embedding.kind != "tfidf" && embedding.kind != "external") {
    problems.add("embedding.kind: expected bow, tfidf or external");
  }
  if (embedding.kind == "external") {
    if (!embedding.path) {
      problems.add("embedding.path: required for external embeddings");
    } else if (!fs::is_regular_file(*embedding.path)) {
      problems.add("embedding.path: no such file " + embedding.path->string());
    }
  }
  if (embedding.max_vocab == 0) problems.add("embedding.max_vocab must be positive");
  if (victims.empty()) problems.add("victims: at least one victim is required");
  for (std::size_t i = 0; i < victims.size(); ++i) {
    guarded("victims[" + std::to_string(i) + "]", problems, [&] { victims[i].validate(); });
  }
  guarded("train", problems, [&] { train.validate(); });
  if (seeds.empty()) problems.add("seeds: at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) problems.add("seeds: duplicates");
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    const std::string where = "attacks[" + std::to_string(i) + "]";
    const auto& a = attacks[i];
    guarded(where, problems, [&] { a.spec.validate(); });
    if (std::set<std::uint64_t>(a.seeds.begin(), a.seeds.end()).size() != a.seeds.size()) {
      problems.add(where + ".seeds: duplicates");
    }
    const bool textual = is_textual_attack(a.spec.name) || (a.spec.name == "combined" && a.spec.budget.textual_edits_per_node > 0);
    if (textual && embedding.kind == "external") {
      problems.add(where + ": textual attacks need bow or tfidf features (external embeddings cannot be recomputed)");
    }
  }
  if (defense.mode != "auto" && defense.mode != "threshold" && defense.mode != "quantile") {
    problems.add("defense.mode: expected auto, threshold or quantile");
  }
  if (defense.enabled) {
    PurifyConfig pc;
    pc.mode = defense.mode == "threshold" ? PurifyConfig::Mode::fixed_threshold : PurifyConfig::Mode::quantile;
    pc.threshold = defense.threshold;
    pc.quantile = defense.quantile;
    if (defense.mode != "auto") guarded("defense", problems, [&] { pc.validate(); });
  }
  if (certification.enabled) {
    guarded("certification", problems, [&] { certification.smoothing.validate(); });
    if (certification.max_nodes == 0) problems.add("certification.max_nodes must be positive");
  }
  if (metrics.options.hom_k < 1) problems.add("metrics.hom_k must be positive");
  if (metrics.options.esmi_bins < 2) problems.add("metrics.esmi_bins must be at least 2");
  if (output_dir.empty()) problems.add("output_dir: must not be empty");
}

}  // namespace

void ExperimentConfig::validate() const {
  Problems problems;
  collect_problems(*this, problems);
  problems.throw_if_any();
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  Problems problems;
  ExperimentConfig cfg;
  cfg.victims.clear();
  check_keys(j,
             {"dataset", "embedding", "victims", "train", "seeds", "attacks", "defense", "certification", "metrics",
              "output_dir"},
             "config", problems);
  if (!j.is_object()) problems.throw_if_any();

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    check_keys(d, {"name", "sbm", "path", "train_frac", "val_frac", "split_seed"}, "dataset", problems);
    read(d, "name", cfg.dataset.name, "dataset", problems);
    if (d.contains("sbm") && !d.at("sbm").is_null()) {
      guarded("dataset.sbm", problems, [&] { cfg.dataset.sbm = sbm_from_json(d.at("sbm")); });
    }
    std::string path;
    read(d, "path", path, "dataset", problems);
    if (!path.empty()) cfg.dataset.path = resolve(path, base_dir);
    read(d, "train_frac", cfg.dataset.train_frac, "dataset", problems);
    read(d, "val_frac", cfg.dataset.val_frac, "dataset", problems);
    read(d, "split_seed", cfg.dataset.split_seed, "dataset", problems);
  } else {
    problems.add("config: missing dataset");
  }

  if (j.contains("embedding")) {
    const auto& e = j.at("embedding");
    check_keys(e, {"kind", "path", "normalize", "max_vocab", "min_df"}, "embedding", problems);
    read(e, "kind", cfg.embedding.kind, "embedding", problems);
    std::string path;
    read(e, "path", path, "embedding", problems);
    if (!path.empty()) cfg.embedding.path = resolve(path, base_dir);
    read(e, "normalize", cfg.embedding.normalize, "embedding", problems);
    read(e, "max_vocab", cfg.embedding.max_vocab, "embedding", problems);
    read(e, "min_df", cfg.embedding.min_df, "embedding", problems);
  }

  if (j.contains("victims")) {
    const auto& v = j.at("victims");
    if (!v.is_array()) {
      problems.add("victims: expected an array");
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string where = "victims[" + std::to_string(i) + "]";
        // a bare string names the architecture with default settings
        if (v[i].is_string()) {
          guarded(where, problems, [&] {
            GnnArch a;
            a.kind = parse_gnn_kind(v[i].get<std::string>());
            cfg.victims.push_back(a);
          });
          continue;
        }
        check_keys(v[i], {"kind", "layers", "hidden", "dropout", "heads_layer1", "heads_layer2", "sage_aggregator"}, where,
                   problems);
        guarded(where, problems, [&] { cfg.victims.push_back(arch_from_json(v[i])); });
      }
    }
  } else {
    cfg.victims.push_back(GnnArch{});
  }

  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"learning_rate", "epochs", "weight_decay", "early_stop_patience"}, "train", problems);
    read(t, "learning_rate", cfg.train.learning_rate, "train", problems);
    read(t, "epochs", cfg.train.epochs, "train", problems);
    read(t, "weight_decay", cfg.train.weight_decay, "train", problems);
    read(t, "early_stop_patience", cfg.train.early_stop_patience, "train", problems);
  }
  read(j, "seeds", cfg.seeds, "config", problems);

  if (j.contains("attacks")) {
    const auto& a = j.at("attacks");
    if (!a.is_array()) {
      problems.add("attacks: expected an array");
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string where = "attacks[" + std::to_string(i) + "]";
        AttackEntry entry;
        entry.spec = parse_attack(a[i], where, problems);
        read(a[i], "seeds", entry.seeds, where, problems);
        if (a[i].is_object() && a[i].contains("target_seed") && !a[i].at("target_seed").is_null()) {
          std::uint64_t ts = 0;
          read(a[i], "target_seed", ts, where, problems);
          entry.target_seed = ts;
        }
        cfg.attacks.push_back(std::move(entry));
      }
    }
  }

  if (j.contains("defense")) {
    const auto& d = j.at("defense");
    check_keys(d, {"enabled", "mode", "threshold", "quantile"}, "defense", problems);
    read(d, "enabled", cfg.defense.enabled, "defense", problems);
    read(d, "mode", cfg.defense.mode, "defense", problems);
    read(d, "threshold", cfg.defense.threshold, "defense", problems);
    read(d, "quantile", cfg.defense.quantile, "defense", problems);
  }

  if (j.contains("certification")) {
    const auto& c = j.at("certification");
    check_keys(c, {"enabled", "p_del", "num_samples", "alpha", "seed", "threads", "base_correctness", "max_nodes"},
               "certification", problems);
    auto& s = cfg.certification.smoothing;
    read(c, "enabled", cfg.certification.enabled, "certification", problems);
    read(c, "p_del", s.p_del, "certification", problems);
    read(c, "num_samples", s.num_samples, "certification", problems);
    read(c, "alpha", s.alpha, "certification", problems);
    read(c, "seed", s.seed, "certification", problems);
    read(c, "threads", s.threads, "certification", problems);
    read(c, "base_correctness", s.base_correctness, "certification", problems);
    read(c, "max_nodes", cfg.certification.max_nodes, "certification", problems);
  }

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    check_keys(m, {"enabled", "hom_k", "esmi_bins", "silhouette_cap", "seed"}, "metrics", problems);
    read(m, "enabled", cfg.metrics.enabled, "metrics", problems);
    read(m, "hom_k", cfg.metrics.options.hom_k, "metrics", problems);
    read(m, "esmi_bins", cfg.metrics.options.esmi_bins, "metrics", problems);
    read(m, "silhouette_cap", cfg.metrics.options.silhouette_cap, "metrics", problems);
    read(m, "seed", cfg.metrics.options.seed, "metrics", problems);
  }

  std::string out;
  read(j, "output_dir", out, "config", problems);
  if (!out.empty()) cfg.output_dir = resolve(out, base_dir);

  collect_problems(cfg, problems);
  problems.throw_if_any();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json dataset = {{"name", cfg.dataset.name},
                  {"train_frac", cfg.dataset.train_frac},
                  {"val_frac", cfg.dataset.val_frac},
                  {"split_seed", cfg.dataset.split_seed}};
  if (cfg.dataset.sbm) dataset["sbm"] = sbm_to_json(*cfg.dataset.sbm);
  if (cfg.dataset.path) dataset["path"] = cfg.dataset.path->string();

  json embedding = {{"kind", cfg.embedding.kind},
                    {"normalize", cfg.embedding.normalize},
                    {"max_vocab", cfg.embedding.max_vocab},
                    {"min_df", cfg.embedding.min_df}};
  if (cfg.embedding.path) embedding["path"] = cfg.embedding.path->string();

  json victims = json::array();
  for (const auto& v : cfg.victims) victims.push_back(arch_to_json(v));

  json attacks = json::array();
  for (const auto& a : cfg.attacks) {
    json e = attack_spec_to_json(a.spec);
    if (!a.seeds.empty()) e["seeds"] = a.seeds;
    if (a.target_seed) e["target_seed"] = *a.target_seed;
    attacks.push_back(std::move(e));
  }

  const auto& s = cfg.certification.smoothing;
  return {{"dataset", dataset},
          {"embedding", embedding},
          {"victims", victims},
          {"train",
           {{"learning_rate", cfg.train.learning_rate},
            {"epochs", cfg.train.epochs},
            {"weight_decay", cfg.train.weight_decay},
            {"early_stop_patience", cfg.train.early_stop_patience}}},
          {"seeds", cfg.seeds},
          {"attacks", attacks},
          {"defense",
           {{"enabled", cfg.defense.enabled},
            {"mode", cfg.defense.mode},
            {"threshold", cfg.defense.threshold},
            {"quantile", cfg.defense.quantile}}},
          {"certification",
           {{"enabled", cfg.certification.enabled},
            {"p_del", s.p_del},
            {"num_samples", s.num_samples},
            {"alpha", s.alpha},
            {"seed", s.seed},
            {"threads", s.threads},
            {"base_correctness", s.base_correctness},
            {"max_nodes", cfg.certification.max_nodes}}},
          {"metrics",
           {{"enabled", cfg.metrics.enabled},
            {"hom_k", cfg.metrics.options.hom_k},
            {"esmi_bins", cfg.metrics.options.esmi_bins},
            {"silhouette_cap", cfg.metrics.options.silhouette_cap},
            {"seed", cfg.metrics.options.seed}}},
          {"output_dir", cfg.output_dir.string()}};
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::vector<std::uint64_t> attack_seeds(const AttackEntry& entry, const ExperimentConfig& cfg) {
  return entry.seeds.empty() ? cfg.seeds : entry.seeds;
}

AttackSpec spec_for_seed(const AttackEntry& entry, std::uint64_t seed) {
  AttackSpec spec = entry.spec;
  spec.seed = seed;
  spec.target_seed = entry.target_seed.value_or(seed);
  return spec;
}

std::string budget_label(const AttackSpec& spec) {
  std::string out;
  if (!is_textual_attack(spec.name)) {
    out = spec.budget.structural_mode == StructuralMode::per_target
              ? "per_target=" + std::to_string(spec.budget.per_target)
              : "rate=" + fmt_number(spec.budget.global_rate);
  }
  if (spec.budget.textual_edits_per_node > 0) {
    if (!out.empty()) out += ",";
    out += "edits=" + std::to_string(spec.budget.textual_edits_per_node);
  }
  return out;
}

double budget_value(const AttackSpec& spec) {
  if (is_textual_attack(spec.name)) return spec.budget.textual_edits_per_node;
  if (spec.budget.structural_mode == StructuralMode::per_target) return spec.budget.per_target;
  return spec.budget.global_rate;
}

}  // namespace poisonbench

#include "poisonbench/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "poisonbench/tagraph/io.hpp"
#include "poisonbench/tagraph/synthetic.hpp"
#include "poisonbench/victims/model.hpp"

namespace poisonbench {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions must be handled by fn.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::string attack_key(const AttackSpec& spec) {
  nlohmann::json j = attack_spec_to_json(spec);
  j["seed"] = spec.seed;
  j["target_seed"] = spec.target_seed;
  return j.dump();
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

struct AttackResult {
  std::optional<PerturbationSet> pset;
  std::string error;
  double ms = 0.0;
};

// Everything derived from one poisoned (or purified) graph that does not depend on the victim.
struct GraphCase {
  std::optional<TextAttributedGraph> graph;
  std::optional<EmbeddingMatrix> features;
  MetricBundle metrics;
  std::vector<NodeId> eval_nodes;
  std::string eval_set = "test";
  std::size_t removed_edges = 0;
  std::vector<std::string> warnings;
  std::string error;
  double ms = 0.0;
};

struct RunItem {
  std::size_t entry = 0;
  std::uint64_t seed = 0;
  AttackSpec spec;
};

void fill_metrics(ReportRow& row, const MetricBundle& m) {
  row.dbi = m.dbi;
  row.sil = m.silhouette;
  row.hom = m.homophily_k;
  row.elmi = m.elmi;
  row.esmi = m.esmi;
  row.ncon = m.ncon;
}

std::string embedding_name(const ExperimentConfig& cfg) {
  if (cfg.embedding.kind != "external") return cfg.embedding.kind + (cfg.embedding.normalize ? "+l2" : "");
  return "external:" + cfg.embedding.path->filename().string() + (cfg.embedding.normalize ? "+l2" : "");
}

}  // namespace

unsigned worker_threads() {
  if (const char* env = std::getenv("POISONBENCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData data;
  data.graph = cfg.dataset.sbm ? generate_synthetic_tag(*cfg.dataset.sbm) : load_graph_dir(*cfg.dataset.path);
  data.split = split_nodes(data.graph, cfg.dataset.train_frac, cfg.dataset.val_frac, cfg.dataset.split_seed);
  if (cfg.embedding.kind == "external") {
    data.features = load_embeddings(*cfg.embedding.path, data.graph.num_nodes());
  } else {
    data.vocab = build_vocab(data.graph.texts(), cfg.embedding.max_vocab, cfg.embedding.min_df);
    data.features = cfg.embedding.kind == "tfidf" ? tfidf_embed(data.graph.texts(), data.vocab)
                                                  : bow_embed(data.graph.texts(), data.vocab);
  }
  if (cfg.embedding.normalize) data.features = l2_normalize_rows(std::move(data.features));
  data.features.validate();
  return data;
}

EmbeddingMatrix features_for(const ExperimentConfig& cfg, const PreparedData& data, const TextAttributedGraph& graph) {
  if (graph.texts() == data.graph.texts()) return data.features;
  if (cfg.embedding.kind == "external") {
    throw ConfigError("external embeddings cannot be recomputed for perturbed texts");
  }
  EmbeddingMatrix out = cfg.embedding.kind == "tfidf" ? tfidf_embed(graph.texts(), data.vocab)
                                                      : bow_embed(graph.texts(), data.vocab);
  if (cfg.embedding.normalize) out = l2_normalize_rows(std::move(out));
  return out;
}

PurifyConfig purify_config_for(const DefenseSpec& defense, const AttackSpec& spec) {
  PurifyConfig pc;
  if (defense.mode == "threshold") {
    pc.mode = PurifyConfig::Mode::fixed_threshold;
    pc.threshold = defense.threshold;
  } else if (defense.mode == "quantile") {
    pc.mode = PurifyConfig::Mode::quantile;
    pc.quantile = defense.quantile;
  } else {
    const bool rate = spec.budget.structural_mode == StructuralMode::global_rate;
    pc = PurifyConfig::for_budget(rate ? spec.budget.global_rate : 0.0);
    if (pc.mode == PurifyConfig::Mode::fixed_threshold) pc.threshold = defense.threshold;
  }
  pc.validate();
  return pc;
}

RobustnessReport run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opts) {
  cfg.validate();
  const unsigned threads = opts.threads ? opts.threads : worker_threads();
  std::mutex log_mu;
  auto log = [&](const std::string& line) {
    if (!opts.log) return;
    std::lock_guard lock(log_mu);
    opts.log(line);
  };

  const PreparedData data = prepare_data(cfg);
  const std::string dataset = cfg.dataset.name;
  const std::string embedding = embedding_name(cfg);
  log("data: " + std::to_string(data.graph.num_nodes()) + " nodes, " + std::to_string(data.graph.num_edges()) +
      " edges, " + std::to_string(data.features.dim()) + " features");

  // seeds of the clean baselines: the experiment seeds plus any attack-only seeds
  std::vector<std::uint64_t> clean_seeds = cfg.seeds;
  std::vector<RunItem> items;
  for (std::size_t e = 0; e < cfg.attacks.size(); ++e) {
    for (auto s : attack_seeds(cfg.attacks[e], cfg)) {
      items.push_back({e, s, spec_for_seed(cfg.attacks[e], s)});
      if (std::find(clean_seeds.begin(), clean_seeds.end(), s) == clean_seeds.end()) clean_seeds.push_back(s);
    }
  }

  // phase 1: poisoning. Combined attacks are split into parts so a structural part
  // shared with a standalone entry runs once.
  std::vector<std::string> keys;
  std::map<std::string, AttackSpec> atomic;
  auto want = [&](const AttackSpec& s) {
    const std::string k = attack_key(s);
    if (atomic.emplace(k, s).second) keys.push_back(k);
  };
  for (const auto& it : items) {
    if (it.spec.name != "combined") {
      want(it.spec);
      continue;
    }
    const auto [s, t] = combined_parts(it.spec);
    if (has_structural_budget(it.spec.budget)) want(s);
    if (it.spec.budget.textual_edits_per_node > 0) want(t);
  }
  std::vector<AttackResult> atomic_results(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t i) {
    const AttackSpec& spec = atomic.at(keys[i]);
    const auto t0 = Clock::now();
    try {
      atomic_results[i].pset = run_attack(data.graph, data.features, data.split, spec);
    } catch (const std::exception& ex) {
      atomic_results[i].error = ex.what();
    }
    atomic_results[i].ms = ms_since(t0);
    log("attack " + spec.name + " " + budget_label(spec) + " seed " + std::to_string(spec.seed) +
        (atomic_results[i].error.empty() ? "" : " failed: " + atomic_results[i].error));
  });
  std::map<std::string, const AttackResult*> by_key;
  for (std::size_t i = 0; i < keys.size(); ++i) by_key[keys[i]] = &atomic_results[i];

  std::vector<AttackResult> attacks(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const AttackSpec& spec = items[i].spec;
    if (spec.name != "combined") {
      attacks[i] = *by_key.at(attack_key(spec));
      continue;
    }
    const auto [s, t] = combined_parts(spec);
    PerturbationSet structural, textual;
    structural.seed = spec.seed;
    AttackResult& out = attacks[i];
    for (const auto& [part, use, dst] :
         {std::tuple{s, has_structural_budget(spec.budget), &structural},
          std::tuple{t, spec.budget.textual_edits_per_node > 0, &textual}}) {
      if (!use) continue;
      const AttackResult& r = *by_key.at(attack_key(part));
      out.ms += r.ms;
      if (!r.pset) {
        out.error = r.error;
      } else {
        *dst = *r.pset;
      }
    }
    if (out.error.empty()) out.pset = assemble_combined(spec, structural, textual);
  }
  if (opts.perturbation_dir) {
    fs::create_directories(*opts.perturbation_dir);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!attacks[i].pset) continue;
      const auto& spec = items[i].spec;
      save_perturbation(*attacks[i].pset, *opts.perturbation_dir /
                                              file_safe(spec.name + "_" + budget_label(spec) + "_seed" +
                                                        std::to_string(spec.seed) + ".json"));
    }
  }

  // phase 2: poisoned graphs, their features and metrics, and the purified variants
  const bool purify_enabled = cfg.defense.enabled;
  std::vector<GraphCase> poisoned(items.size()), purified(items.size());
  GraphCase clean_case;
  clean_case.graph = data.graph;
  clean_case.features = data.features;
  clean_case.eval_nodes = data.split.test;

  auto compute_metrics = [&](GraphCase& gc) {
    if (!cfg.metrics.enabled) return;
    gc.metrics = embedding_metrics(gc.features->values, *gc.graph, cfg.metrics.options);
    gc.warnings.insert(gc.warnings.end(), gc.metrics.warnings.begin(), gc.metrics.warnings.end());
  };
  const std::size_t graph_tasks = items.size() + 1;
  parallel_for(graph_tasks, threads, [&](std::size_t i) {
    if (i == items.size()) {
      const auto t0 = Clock::now();
      compute_metrics(clean_case);
      clean_case.ms = ms_since(t0);
      return;
    }
    GraphCase& gc = poisoned[i];
    const AttackResult& ar = attacks[i];
    if (!ar.pset) {
      gc.error = "attack failed: " + ar.error;
      purified[i].error = gc.error;
      return;
    }
    const auto t0 = Clock::now();
    try {
      const PerturbationSet& ps = *ar.pset;
      gc.warnings = ps.warnings;
      gc.graph = apply_perturbation(data.graph, ps);
      gc.features = features_for(cfg, data, *gc.graph);
      if (!ps.targets.empty()) {
        gc.eval_nodes = ps.targets;
        gc.eval_set = "targets";
      } else {
        gc.eval_nodes = data.split.test;
      }
      compute_metrics(gc);
    } catch (const std::exception& ex) {
      gc.error = ex.what();
    }
    gc.ms = ms_since(t0);
    if (!purify_enabled || !gc.error.empty() || ar.pset->edge_flips.empty()) return;
    GraphCase& pc = purified[i];
    const auto t1 = Clock::now();
    try {
      const auto pr = purify(*gc.graph, gc.features->values, purify_config_for(cfg.defense, items[i].spec));
      pc.graph = pr.graph;
      pc.features = gc.features;
      pc.removed_edges = pr.removed.size();
      pc.warnings = pr.warnings;
      pc.eval_nodes = gc.eval_nodes;
      pc.eval_set = gc.eval_set;
      compute_metrics(pc);
    } catch (const std::exception& ex) {
      pc.error = ex.what();
    }
    pc.ms = ms_since(t1);
  });

  // phase 3: clean victims
  struct CleanModel {
    std::optional<VictimModel> model;
    std::string error;
    double ms = 0.0;
  };
  const std::size_t nv = cfg.victims.size();
  std::vector<CleanModel> clean(nv * clean_seeds.size());
  auto clean_index = [&](std::size_t v, std::uint64_t seed) {
    const auto pos = std::find(clean_seeds.begin(), clean_seeds.end(), seed) - clean_seeds.begin();
    return v * clean_seeds.size() + static_cast<std::size_t>(pos);
  };
  parallel_for(clean.size(), threads, [&](std::size_t i) {
    const std::size_t v = i / clean_seeds.size();
    TrainConfig tc = cfg.train;
    tc.seed = clean_seeds[i % clean_seeds.size()];
    const auto t0 = Clock::now();
    try {
      clean[i].model = train_gnn(cfg.victims[v], data.graph, data.features, data.split, tc);
    } catch (const std::exception& ex) {
      clean[i].error = ex.what();
    }
    clean[i].ms = ms_since(t0);
    log("clean " + to_string(cfg.victims[v].kind) + " seed " + std::to_string(tc.seed) +
        (clean[i].error.empty() ? "" : " failed: " + clean[i].error));
  });

  const bool certify_enabled = cfg.certification.enabled;
  auto certify_row = [&](ReportRow& row, const VictimModel& model, const GraphCase& gc) {
    if (!certify_enabled) return;
    SmoothingConfig sc = cfg.certification.smoothing;
    if (threads > 1) sc.threads = 1;  // rows already run in parallel
    std::vector<NodeId> nodes = gc.eval_nodes;
    if (nodes.size() > cfg.certification.max_nodes) nodes.resize(cfg.certification.max_nodes);
    const VictimClassifier clf(model, *gc.features);
    const CertResult cr = certify_set(clf, *gc.graph, nodes, gc.graph->labels(), sc);
    row.ca = cr.ca;
    row.mcr = cr.mcr;
  };

  // phase 4: rows
  struct Job {
    std::size_t item = 0;  // SIZE_MAX for clean rows
    std::size_t victim = 0;
    std::uint64_t seed = 0;
    bool purified = false;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < nv; ++v) {
    for (auto s : clean_seeds) jobs.push_back({SIZE_MAX, v, s, false});
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t v = 0; v < nv; ++v) {
      jobs.push_back({i, v, items[i].seed, false});
      if (purify_enabled && attacks[i].pset && !attacks[i].pset->edge_flips.empty()) {
        jobs.push_back({i, v, items[i].seed, true});
      }
    }
  }
  std::vector<ReportRow> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    ReportRow& row = rows[j];
    row.dataset = dataset;
    row.embedding = embedding;
    row.arch = to_string(cfg.victims[job.victim].kind);
    row.seed = job.seed;
    const CleanModel& cm = clean[clean_index(job.victim, job.seed)];
    const auto t0 = Clock::now();

    if (job.item == SIZE_MAX) {
      row.attack = "clean";
      row.budget_label = "none";
      row.wall_ms = cm.ms + clean_case.ms;
      fill_metrics(row, clean_case.metrics);
      row.warnings = clean_case.warnings;
      if (!cm.model) {
        row.error = cm.error;
        return;
      }
      try {
        row.acc_clean = 100.0 * evaluate_accuracy(*cm.model, data.graph, data.features, data.split.test);
        certify_row(row, *cm.model, clean_case);
      } catch (const std::exception& ex) {
        row.error = ex.what();
      }
      row.wall_ms += ms_since(t0);
      return;
    }

    const RunItem& item = items[job.item];
    const GraphCase& gc = job.purified ? purified[job.item] : poisoned[job.item];
    row.attack = item.spec.name + (job.purified ? "+purify" : "");
    row.budget_label = budget_label(item.spec);
    row.budget = budget_value(item.spec);
    row.eval_set = gc.eval_set;
    row.removed_edges = gc.removed_edges;
    if (attacks[job.item].pset) row.perturbation_hash = attacks[job.item].pset->content_hash();
    row.wall_ms = attacks[job.item].ms + poisoned[job.item].ms + (job.purified ? gc.ms : 0.0);
    if (!gc.error.empty()) {
      row.error = gc.error;
      return;
    }
    fill_metrics(row, gc.metrics);
    row.warnings = gc.warnings;
    if (!cm.model) {
      row.error = "clean baseline failed: " + cm.error;
      return;
    }
    try {
      row.acc_clean = 100.0 * evaluate_accuracy(*cm.model, data.graph, data.features, gc.eval_nodes);
      TrainConfig tc = cfg.train;
      tc.seed = job.seed;
      // poisoning: the victim is trained from scratch on the perturbed data
      const VictimModel model = train_gnn(cfg.victims[job.victim], *gc.graph, *gc.features, data.split, tc);
      row.acc_attack = 100.0 * evaluate_accuracy(model, *gc.graph, *gc.features, gc.eval_nodes);
      row.rda = rda(*row.acc_clean, *row.acc_attack);
      certify_row(row, model, gc);
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    row.wall_ms += ms_since(t0);
    log(row.attack + " " + row.budget_label + " " + row.arch + " seed " + std::to_string(row.seed) +
        (row.error ? " failed: " + *row.error : ""));
  });

  RobustnessReport report;
  report.config = to_json(cfg);
  report.rows = std::move(rows);
  return report;
}

}  // namespace poisonbench

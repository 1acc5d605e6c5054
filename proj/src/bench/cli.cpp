#include "poisonbench/bench/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "poisonbench/bench/experiment.hpp"
#include "poisonbench/tagraph/io.hpp"
#include "poisonbench/victims/model.hpp"
#include "poisonbench/victims/serialize.hpp"

namespace poisonbench {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by every subcommand that reads a dataset.
struct DataFlags {
  std::string graph;
  std::vector<std::string> sbm;
  std::string embedding = "bow";
  std::string embedding_path;
  bool normalize = false;
  std::size_t max_vocab = 5000;
  double train_frac = 0.1;
  double val_frac = 0.1;
  std::uint64_t split_seed = 0;
  std::string perturbation;

  void add_to(CLI::App* app, bool with_perturbation) {
    app->add_option("--graph", graph, "graph directory (edges.tsv, texts.txt, labels.txt)");
    app->add_option("--sbm", sbm, "synthetic graph instead, as KEY=VALUE pairs (N C p_in p_out V words skew seed)");
    app->add_option("--embedding", embedding, "bow, tfidf or external")->check(CLI::IsMember({"bow", "tfidf", "external"}));
    app->add_option("--embedding-path", embedding_path, "embedding matrix file for --embedding external");
    app->add_flag("--normalize", normalize, "L2-normalize feature rows");
    app->add_option("--max-vocab", max_vocab, "vocabulary size cap");
    app->add_option("--train-frac", train_frac, "fraction of labeled training nodes");
    app->add_option("--val-frac", val_frac, "fraction of validation nodes");
    app->add_option("--split-seed", split_seed, "seed of the node split");
    if (with_perturbation) app->add_option("--perturbation", perturbation, "perturbation JSON to apply first");
  }
};

SbmParams parse_sbm(const std::vector<std::string>& kvs) {
  SbmParams p;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--sbm: expected KEY=VALUE, got '" + kv + "'");
    const std::string k = kv.substr(0, eq);
    const std::string v = kv.substr(eq + 1);
    try {
      if (k == "N" || k == "num_nodes") p.num_nodes = std::stoull(v);
      else if (k == "C" || k == "num_classes") p.num_classes = std::stoi(v);
      else if (k == "p_in" || k == "intra_edge_prob") p.intra_edge_prob = std::stod(v);
      else if (k == "p_out" || k == "inter_edge_prob") p.inter_edge_prob = std::stod(v);
      else if (k == "V" || k == "vocab_size") p.vocab_size = std::stoull(v);
      else if (k == "words" || k == "words_per_node") p.words_per_node = std::stoull(v);
      else if (k == "skew" || k == "class_word_skew") p.class_word_skew = std::stod(v);
      else if (k == "seed") p.seed = std::stoull(v);
      else throw ConfigError("--sbm: unknown key '" + k + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("--sbm: bad value for " + k + ": '" + v + "'");
    }
  }
  p.validate();
  return p;
}

ExperimentConfig config_from_flags(const DataFlags& f) {
  ExperimentConfig cfg;
  cfg.victims = {GnnArch{}};  // unused; keeps validate() focused on the data flags
  if (!f.graph.empty() && !f.sbm.empty()) throw ConfigError("give --graph or --sbm, not both");
  if (!f.graph.empty()) {
    cfg.dataset.path = f.graph;
    cfg.dataset.name = fs::path(f.graph).filename().string();
  } else {
    cfg.dataset.sbm = parse_sbm(f.sbm);
  }
  cfg.dataset.train_frac = f.train_frac;
  cfg.dataset.val_frac = f.val_frac;
  cfg.dataset.split_seed = f.split_seed;
  cfg.embedding.kind = f.embedding;
  if (!f.embedding_path.empty()) cfg.embedding.path = f.embedding_path;
  cfg.embedding.normalize = f.normalize;
  cfg.embedding.max_vocab = f.max_vocab;
  return cfg;
}

// Dataset after the optional perturbation, with matching features.
struct Loaded {
  ExperimentConfig cfg;
  PreparedData data;
  std::optional<PerturbationSet> pset;
  TextAttributedGraph graph;
  EmbeddingMatrix features;
};

Loaded load(const DataFlags& f) {
  Loaded l{config_from_flags(f), {}, std::nullopt, {}, {}};
  l.cfg.validate();
  l.data = prepare_data(l.cfg);
  l.graph = l.data.graph;
  l.features = l.data.features;
  if (!f.perturbation.empty()) {
    l.pset = load_perturbation(f.perturbation);
    l.graph = apply_perturbation(l.data.graph, *l.pset);
    l.features = features_for(l.cfg, l.data, l.graph);
  }
  return l;
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poisoning, defense and certification bench for text-attributed graphs", "poisonbench"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic or node-sampled graph directory");
  std::vector<std::string> gen_sbm;
  std::string gen_from, gen_out;
  std::size_t gen_sample = 0, gen_fanout = 10, gen_hops = 2;
  std::uint64_t gen_seed = 0;
  gen->add_option("--sbm", gen_sbm, "KEY=VALUE pairs: N C p_in p_out V words skew seed");
  gen->add_option("--from", gen_from, "sample a subset of this graph directory instead");
  gen->add_option("--sample", gen_sample, "number of seed nodes for --from");
  gen->add_option("--fanout", gen_fanout, "neighbors sampled per node and hop");
  gen->add_option("--hops", gen_hops, "sampling hops");
  gen->add_option("--seed", gen_seed, "sampling seed");
  gen->add_option("--out", gen_out, "output directory")->required();

  // attack
  auto* att = app.add_subcommand("attack", "poison a graph and write the perturbation set");
  DataFlags att_data;
  att_data.add_to(att, false);
  std::string att_name, att_out, att_structural = "meta", att_textual = "word";
  std::optional<double> att_rate;
  std::optional<int> att_per_target, att_text_edits;
  std::uint64_t att_seed = 0;
  std::optional<std::uint64_t> att_target_seed;
  std::size_t att_min_degree = 10;
  double att_target_rate = 1.0;
  bool att_oracle = false;
  int att_top_k = 50;
  att->add_option("--name", att_name, "dice, random, meta, targeted, random_rewire, char, word, random_char, combined")
      ->required();
  auto* rate_opt = att->add_option("--rate", att_rate, "structural budget as a fraction of edges");
  att->add_option("--per-target", att_per_target, "flips per target node (targeted, random_rewire)")->excludes(rate_opt);
  att->add_option("--text-edits", att_text_edits, "textual edits per node");
  att->add_option("--seed", att_seed, "attack seed");
  att->add_option("--target-seed", att_target_seed, "target sampling seed (default: --seed)");
  att->add_option("--target-min-degree", att_min_degree, "targets need a degree above this");
  att->add_option("--target-rate", att_target_rate, "fraction of eligible targets sampled");
  att->add_flag("--oracle-labels", att_oracle, "dice: use true labels everywhere");
  att->add_option("--top-k", att_top_k, "word attack candidate pool size");
  att->add_option("--structural", att_structural, "combined: structural part");
  att->add_option("--textual", att_textual, "combined: textual part");
  att->add_option("--out", att_out, "output file (default: stdout)");

  // train
  auto* trn = app.add_subcommand("train", "train a victim and save it");
  DataFlags trn_data;
  trn_data.add_to(trn, true);
  GnnArch trn_arch;
  std::string trn_kind = "gcn", trn_out;
  TrainConfig trn_cfg;
  trn->add_option("--arch", trn_kind, "gcn, gat or sage")->check(CLI::IsMember({"gcn", "gat", "sage"}));
  trn->add_option("--hidden", trn_arch.hidden, "hidden units");
  trn->add_option("--dropout", trn_arch.dropout, "dropout rate");
  trn->add_option("--heads", trn_arch.heads_layer1, "gat heads in the first layer");
  trn->add_option("--epochs", trn_cfg.epochs, "maximum epochs");
  trn->add_option("--lr", trn_cfg.learning_rate, "learning rate");
  trn->add_option("--weight-decay", trn_cfg.weight_decay, "L2 weight decay");
  trn->add_option("--patience", trn_cfg.early_stop_patience, "early stopping patience");
  trn->add_option("--seed", trn_cfg.seed, "training seed");
  trn->add_option("--out", trn_out, "model directory")->required();

  // eval
  auto* evl = app.add_subcommand("eval", "accuracy and embedding metrics of a trained victim");
  DataFlags evl_data;
  evl_data.add_to(evl, true);
  std::string evl_model, evl_clean_model;
  bool evl_metrics = false;
  MetricOptions evl_mopts;
  evl->add_option("--model", evl_model, "model directory")->required();
  evl->add_option("--clean-model", evl_clean_model, "baseline model evaluated on the clean graph, for RDA");
  evl->add_flag("--metrics", evl_metrics, "also compute the embedding metric suite");
  evl->add_option("--metrics-seed", evl_mopts.seed, "seed of sampled metrics");

  // purify
  auto* pur = app.add_subcommand("purify", "drop edges whose endpoint embeddings are dissimilar");
  DataFlags pur_data;
  pur_data.add_to(pur, true);
  std::optional<double> pur_threshold, pur_quantile;
  std::string pur_out;
  auto* thr_opt = pur->add_option("--threshold", pur_threshold, "remove edges with cosine below this");
  pur->add_option("--quantile", pur_quantile, "remove this fraction of lowest-cosine edges")->excludes(thr_opt);
  pur->add_option("--out", pur_out, "output graph directory")->required();

  // certify
  auto* cer = app.add_subcommand("certify", "certify predictions under random edge deletion");
  DataFlags cer_data;
  cer_data.add_to(cer, true);
  std::string cer_model, cer_out;
  SmoothingConfig cer_cfg;
  std::size_t cer_max_nodes = 200;
  cer->add_option("--model", cer_model, "model directory")->required();
  cer->add_option("--p-del", cer_cfg.p_del, "edge deletion probability");
  cer->add_option("--samples", cer_cfg.num_samples, "Monte Carlo samples");
  cer->add_option("--alpha", cer_cfg.alpha, "one-sided error level");
  cer->add_option("--seed", cer_cfg.seed, "sampling seed");
  cer->add_option("--threads", cer_cfg.threads, "worker threads");
  cer->add_flag("--base-correctness", cer_cfg.base_correctness, "judge correctness by the base prediction");
  cer->add_option("--max-nodes", cer_max_nodes, "certify the first N test nodes");
  cer->add_option("--out", cer_out, "per-node CSV");

  // run
  auto* run = app.add_subcommand("run", "full pipeline from one config file");
  std::string run_config, run_out;
  unsigned run_threads = 0;
  bool run_quiet = false;
  run->add_option("--config", run_config, "experiment JSON")->required();
  run->add_option("--out", run_out, "output directory (overrides output_dir)");
  run->add_option("--threads", run_threads, "worker threads (default: POISONBENCH_THREADS or all cores)");
  run->add_flag("--quiet", run_quiet, "no progress lines");

  // report
  auto* rep = app.add_subcommand("report", "check a report, summarize it and optionally re-emit it");
  std::string rep_in, rep_out;
  std::vector<std::string> rep_formats{"csv", "json"};
  rep->add_option("--in", rep_in, "report.json")->required();
  rep->add_option("--out", rep_out, "directory to write the report files to");
  rep->add_option("--format", rep_formats, "csv and/or json")->check(CLI::IsMember({"csv", "json"}))->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    CLI::App* shown = &app;
    for (auto* sub : app.get_subcommands()) shown = sub;
    err << shown->help();
    return kExitInvalid;
  }

  try {
    if (gen->parsed()) {
      TextAttributedGraph g;
      if (!gen_from.empty()) {
        if (!gen_sbm.empty()) throw ConfigError("give --sbm or --from, not both");
        if (gen_sample == 0) throw ConfigError("--from needs --sample");
        g = sample_subset(load_graph_dir(gen_from), gen_sample, gen_fanout, gen_hops, gen_seed);
      } else {
        g = generate_synthetic_tag(parse_sbm(gen_sbm));
      }
      save_graph(g, gen_out);
      print_json(out, {{"out", gen_out},
                       {"nodes", g.num_nodes()},
                       {"edges", g.num_edges()},
                       {"classes", g.num_classes()},
                       {"edge_homophily", edge_homophily(g)}});
    } else if (att->parsed()) {
      json spec_json = {{"name", att_name}, {"word_top_k", att_top_k}, {"oracle_labels", att_oracle},
                        {"target_min_degree", att_min_degree}, {"target_sample_rate", att_target_rate}};
      if (att_rate) spec_json["rate"] = *att_rate;
      if (att_per_target) spec_json["per_target"] = *att_per_target;
      if (att_text_edits) spec_json["text_edits"] = *att_text_edits;
      if (att_name == "combined") {
        spec_json["structural"] = att_structural;
        spec_json["textual"] = att_textual;
      }
      AttackSpec spec = attack_spec_from_json(spec_json);
      spec.seed = att_seed;
      spec.target_seed = att_target_seed.value_or(att_seed);
      const Loaded l = load(att_data);
      const PerturbationSet ps = run_attack(l.data.graph, l.data.features, l.data.split, spec);
      if (att_out.empty()) {
        print_json(out, to_json(ps));
      } else {
        save_perturbation(ps, att_out);
        print_json(out, {{"out", att_out},
                         {"hash", ps.content_hash()},
                         {"edge_flips", ps.edge_flips.size()},
                         {"text_edits", ps.text_edits.size()},
                         {"warnings", ps.warnings}});
      }
    } else if (trn->parsed()) {
      trn_arch.kind = parse_gnn_kind(trn_kind);
      trn_arch.validate();
      trn_cfg.validate();
      const Loaded l = load(trn_data);
      const VictimModel m = train_gnn(trn_arch, l.graph, l.features, l.data.split, trn_cfg);
      save_model(m, trn_out);
      print_json(out, {{"out", trn_out},
                       {"arch", to_string(m.arch.kind)},
                       {"seed", m.seed},
                       {"epochs_trained", m.epochs_trained},
                       {"val_accuracy", 100.0 * m.val_accuracy},
                       {"test_accuracy", 100.0 * evaluate_accuracy(m, l.graph, l.features, l.data.split.test)}});
    } else if (evl->parsed()) {
      const Loaded l = load(evl_data);
      const VictimModel m = load_model(evl_model);
      json res = {{"test_accuracy", 100.0 * evaluate_accuracy(m, l.graph, l.features, l.data.split.test)}};
      if (!evl_clean_model.empty()) {
        const VictimModel c = load_model(evl_clean_model);
        const double clean = 100.0 * evaluate_accuracy(c, l.data.graph, l.data.features, l.data.split.test);
        res["clean_accuracy"] = clean;
        res["rda"] = rda(clean, res["test_accuracy"].get<double>());
      }
      res["edge_homophily"] = edge_homophily(l.graph);
      if (evl_metrics) {
        const MetricBundle mb = embedding_metrics(l.features.values, l.graph, evl_mopts);
        res["metrics"] = {{"dbi", opt_json(mb.dbi)},   {"sil", opt_json(mb.silhouette)}, {"hom", opt_json(mb.homophily_k)},
                          {"elmi", opt_json(mb.elmi)}, {"esmi", opt_json(mb.esmi)},      {"ncon", opt_json(mb.ncon)}};
        res["warnings"] = mb.warnings;
      }
      print_json(out, res);
    } else if (pur->parsed()) {
      const Loaded l = load(pur_data);
      PurifyConfig pc;
      if (pur_quantile) {
        pc.mode = PurifyConfig::Mode::quantile;
        pc.quantile = *pur_quantile;
      } else if (pur_threshold) {
        pc.threshold = *pur_threshold;
      } else if (l.pset && l.pset->budget.structural_mode == StructuralMode::global_rate) {
        pc = PurifyConfig::for_budget(l.pset->budget.global_rate);
      }
      const PurifyResult pr = purify(l.graph, l.features.values, pc);
      save_graph(pr.graph, pur_out);
      json res = {{"out", pur_out},
                  {"mode", pc.mode == PurifyConfig::Mode::quantile ? "quantile" : "threshold"},
                  {"removed", pr.removed.size()},
                  {"kept", pr.graph.num_edges()},
                  {"warnings", pr.warnings}};
      if (l.pset) {
        std::set<std::pair<NodeId, NodeId>> added;
        for (const auto& f : l.pset->edge_flips) {
          if (f.kind == FlipKind::add) added.insert({f.u, f.v});
        }
        std::size_t hit = 0;
        for (const auto& e : pr.removed) hit += added.count({e.u, e.v});
        res["removed_attack_added"] = hit;
      }
      print_json(out, res);
    } else if (cer->parsed()) {
      cer_cfg.validate();
      const Loaded l = load(cer_data);
      const VictimModel m = load_model(cer_model);
      std::vector<NodeId> nodes = l.data.split.test;
      if (nodes.size() > cer_max_nodes) nodes.resize(cer_max_nodes);
      const VictimClassifier clf(m, l.features);
      const CertResult cr = certify_set(clf, l.graph, nodes, l.graph.labels(), cer_cfg);
      if (!cer_out.empty()) write_certificate_csv(cr, cer_out);
      print_json(out, certificate_summary(cr));
    } else if (run->parsed()) {
      ExperimentConfig cfg = load_config(run_config);
      if (!run_out.empty()) cfg.output_dir = run_out;
      ExperimentOptions opts;
      opts.threads = run_threads;
      opts.perturbation_dir = cfg.output_dir / "perturbations";
      if (!run_quiet) opts.log = [&err](const std::string& line) { err << line << '\n'; };
      const RobustnessReport report = run_experiment(cfg, opts);
      emit_report(report, cfg.output_dir);
      std::size_t failed = 0;
      for (const auto& r : report.rows) failed += r.error.has_value();
      print_json(out, {{"out", cfg.output_dir.string()},
                       {"rows", report.rows.size()},
                       {"failed_rows", failed},
                       {"seeds", cfg.seeds},
                       {"content_hash", report.content_hash()}});
    } else if (rep->parsed()) {
      const RobustnessReport report = load_report(rep_in);
      if (!rep_out.empty()) {
        std::vector<ReportFormat> formats;
        for (const auto& f : rep_formats) formats.push_back(f == "csv" ? ReportFormat::csv : ReportFormat::json);
        emit_report(report, rep_out, formats);
      }
      // mean and sample deviation over seeds per (attack, budget, arch)
      std::map<std::tuple<std::string, std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
      for (const auto& r : report.rows) {
        if (r.error) continue;
        auto& g = groups[{r.attack, r.budget_label, r.arch}];
        if (r.acc_attack) {
          g.first.push_back(*r.acc_attack);
        } else if (r.acc_clean) {
          g.first.push_back(*r.acc_clean);
        }
        if (r.rda) g.second.push_back(*r.rda);
      }
      json summary = json::array();
      for (const auto& [key, g] : groups) {
        json s = {{"attack", std::get<0>(key)},
                  {"budget", std::get<1>(key)},
                  {"arch", std::get<2>(key)},
                  {"runs", g.first.size()},
                  {"acc_mean", mean(g.first)},
                  {"acc_std", stdev(g.first)}};
        if (!g.second.empty()) {
          s["rda_mean"] = mean(g.second);
          s["rda_std"] = stdev(g.second);
        }
        summary.push_back(std::move(s));
      }
      print_json(out, {{"content_hash", report.content_hash()}, {"summary", summary}});
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace poisonbench

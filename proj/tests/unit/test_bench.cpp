#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "poisonbench/bench/cli.hpp"
#include "poisonbench/bench/config.hpp"
#include "poisonbench/bench/experiment.hpp"
#include "poisonbench/bench/report.hpp"

using namespace poisonbench;
using nlohmann::json;
using pbtest::TempDir;

namespace {

json small_config() {
  return json::parse(R"({
    "dataset": {"name": "tiny", "sbm": {"num_nodes": 120, "num_classes": 3, "intra_edge_prob": 0.08,
                "inter_edge_prob": 0.008, "vocab_size": 60, "words_per_node": 12, "class_word_skew": 0.4, "seed": 5}},
    "embedding": {"kind": "bow"},
    "victims": ["gcn"],
    "train": {"epochs": 40},
    "seeds": [1, 2],
    "attacks": [{"name": "dice", "rate": 0.2}],
    "metrics": {"enabled": false}
  })");
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out(1);
  for (char c : s) {
    if (c == ',') out.emplace_back();
    else out.back() += c;
  }
  return out;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int rc = cli_main(args, out, err);
  if (out_text) *out_text = out.str();
  return rc;
}

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  const ExperimentConfig cfg = config_from_json(small_config());
  EXPECT_EQ(cfg.dataset.name, "tiny");
  ASSERT_TRUE(cfg.dataset.sbm.has_value());
  EXPECT_EQ(cfg.dataset.sbm->num_nodes, 120u);
  ASSERT_EQ(cfg.attacks.size(), 1u);
  EXPECT_EQ(cfg.attacks[0].spec.budget.structural_mode, StructuralMode::global_rate);
  EXPECT_DOUBLE_EQ(cfg.attacks[0].spec.budget.global_rate, 0.2);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(attack_seeds(cfg.attacks[0], cfg), cfg.seeds);

  const json once = to_json(cfg);
  EXPECT_EQ(to_json(config_from_json(once)), once);
}

TEST(Config, UnknownKeysRejected) {
  json j = small_config();
  j["dataset"]["trian_frac"] = 0.2;
  try {
    config_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("trian_frac"), std::string::npos);
  }
  j = small_config();
  j["attacks"][0]["ratee"] = 0.1;
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, EveryProblemReportedAtOnce) {
  json j = small_config();
  j["victims"] = json::array();
  j["seeds"] = {3, 3};
  j["embedding"]["kind"] = "word2vec";
  j["attacks"][0]["per_target"] = 4;  // dice takes rate
  try {
    config_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* part : {"victims", "seeds", "embedding.kind", "per_target"}) {
      EXPECT_NE(msg.find(part), std::string::npos) << part << " missing from\n" << msg;
    }
  }
}

TEST(Config, BudgetModeFollowsAttack) {
  auto t = attack_spec_from_json({{"name", "targeted"}, {"per_target", 5}});
  EXPECT_EQ(t.budget.structural_mode, StructuralMode::per_target);
  EXPECT_EQ(budget_label(t), "per_target=5");
  EXPECT_DOUBLE_EQ(budget_value(t), 5.0);
  EXPECT_THROW(attack_spec_from_json({{"name", "targeted"}, {"rate", 0.1}}), ConfigError);

  auto c = attack_spec_from_json({{"name", "combined"}, {"rate", 0.2}});
  EXPECT_EQ(c.budget.textual_edits_per_node, 3u);
  EXPECT_EQ(budget_label(c), "rate=0.2,edits=3");

  auto w = attack_spec_from_json({{"name", "word"}, {"text_edits", 2}});
  EXPECT_EQ(budget_label(w), "edits=2");
  EXPECT_DOUBLE_EQ(budget_value(w), 2.0);
  EXPECT_THROW(attack_spec_from_json({{"name", "nonsense"}, {"rate", 0.1}}), ConfigError);
}

TEST(Config, RelativePathsResolveAgainstFile) {
  TempDir dir;
  std::filesystem::create_directories(dir / "graphs" / "g");
  json j = small_config();
  j["dataset"].erase("sbm");
  j["dataset"]["path"] = "graphs/g";
  std::ofstream(dir / "exp.json") << j.dump();
  const auto cfg = load_config(dir / "exp.json");
  ASSERT_TRUE(cfg.dataset.path.has_value());
  EXPECT_TRUE(std::filesystem::equivalent(*cfg.dataset.path, dir / "graphs" / "g"));
}

TEST(Report, CsvHeaderAndRowsConsistent) {
  const ExperimentConfig cfg = config_from_json(small_config());
  const RobustnessReport rep = run_experiment(cfg, {.threads = 1, .perturbation_dir = {}, .log = {}});
  const auto csv = lines(report_csv(rep));
  ASSERT_EQ(csv.size(), rep.rows.size() + 1);
  EXPECT_EQ(csv[0], "dataset,embedding,arch,attack,budget,seed,acc_clean,acc_attack,rda,dbi,sil,hom,elmi,esmi,ncon,ca,mcr,wall_ms");
  for (std::size_t i = 1; i < csv.size(); ++i) EXPECT_EQ(split_commas(csv[i]).size(), 18u) << csv[i];

  // 1 victim x 2 seeds clean, then 1 attack x 2 seeds
  ASSERT_EQ(rep.rows.size(), 4u);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(rep.rows[i].attack, "clean");
  for (int i = 2; i < 4; ++i) {
    const auto& r = rep.rows[i];
    EXPECT_EQ(r.attack, "dice");
    EXPECT_FALSE(r.error.has_value());
    ASSERT_TRUE(r.acc_clean && r.acc_attack && r.rda);
    EXPECT_NEAR(*r.rda, 100.0 * (*r.acc_clean - *r.acc_attack) / *r.acc_clean, 1e-9);
    EXPECT_FALSE(r.perturbation_hash.empty());
    // the clean accuracy of an attack row is the clean row of the same seed
    EXPECT_EQ(*r.acc_clean, *rep.rows[i - 2].acc_clean);
  }
}

TEST(Report, JsonRoundTripChecksHash) {
  const ExperimentConfig cfg = config_from_json(small_config());
  const RobustnessReport rep = run_experiment(cfg, {.threads = 1, .perturbation_dir = {}, .log = {}});
  TempDir dir;
  emit_report(rep, dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir / "report.csv"));
  const RobustnessReport back = load_report(dir / "report.json");
  EXPECT_EQ(back, rep);
  EXPECT_EQ(back.content_hash(), rep.content_hash());

  json j = to_json(rep);
  j["rows"][0]["seed"] = 99;
  EXPECT_THROW(report_from_json(j), ValidationError);
  EXPECT_THROW(emit_report(RobustnessReport{}, dir.path()), ValidationError);
}

TEST(Experiment, EmptyAttackListGivesCleanRows) {
  json j = small_config();
  j["attacks"] = json::array();
  j["victims"] = {"gcn", "sage"};
  const auto rep = run_experiment(config_from_json(j), {.threads = 1, .perturbation_dir = {}, .log = {}});
  ASSERT_EQ(rep.rows.size(), 4u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.attack, "clean");
    EXPECT_FALSE(r.rda.has_value());
    ASSERT_TRUE(r.acc_clean.has_value());
  }
}

TEST(Experiment, OneRowPerAttackSeed) {
  json j = small_config();
  j["seeds"] = {1, 2, 3, 4, 5};
  const auto rep = run_experiment(config_from_json(j), {.threads = 1, .perturbation_dir = {}, .log = {}});
  std::vector<std::uint64_t> attack_seeds;
  for (const auto& r : rep.rows) {
    if (r.attack == "dice") attack_seeds.push_back(r.seed);
  }
  EXPECT_EQ(attack_seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
}

TEST(Experiment, HashIndependentOfThreads) {
  json j = small_config();
  j["victims"] = {"gcn", "sage"};
  j["defense"] = {{"enabled", true}};
  const auto cfg = config_from_json(j);
  const auto a = run_experiment(cfg, {.threads = 1, .perturbation_dir = {}, .log = {}});
  const auto b = run_experiment(cfg, {.threads = 3, .perturbation_dir = {}, .log = {}});
  EXPECT_EQ(a.content_hash(), b.content_hash());
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].acc_attack, b.rows[i].acc_attack);
  // defense adds a purified row after each attack row
  std::size_t purified = 0;
  for (const auto& r : a.rows) purified += r.attack == "dice+purify";
  EXPECT_EQ(purified, 4u);
}

TEST(Experiment, WritesPerturbations) {
  TempDir dir;
  run_experiment(config_from_json(small_config()), {.threads = 1, .perturbation_dir = dir.path(), .log = {}});
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) n += e.path().extension() == ".json";
  EXPECT_EQ(n, 2u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({}), kExitInvalid);
  EXPECT_EQ(cli({"frobnicate"}), kExitInvalid);
  EXPECT_EQ(cli({"generate", "--bogus"}), kExitInvalid);
  EXPECT_EQ(cli({"generate", "--sbm", "N=50", "p_in=2", "--out", "x"}), kExitInvalid);
  EXPECT_EQ(cli({"--help"}), kExitOk);

  TempDir dir;
  std::ofstream(dir / "bad.json") << R"({"victims": ["gcn"], "dataset": {"sbm": {}}, "typo": 1})";
  EXPECT_EQ(cli({"run", "--config", (dir / "bad.json").string(), "--quiet"}), kExitInvalid);
}

TEST(Cli, GenerateAttackDeterministic) {
  TempDir dir;
  const std::string g = (dir / "g").string();
  ASSERT_EQ(cli({"generate", "--sbm", "N=80", "C=2", "p_in=0.1", "p_out=0.01", "seed=3", "--out", g}), kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "g" / "edges.tsv"));

  std::string a, b, c;
  const std::vector<std::string> att = {"attack", "--graph", g, "--name", "dice", "--rate", "0.1", "--seed", "4"};
  ASSERT_EQ(cli(att, &a), kExitOk);
  ASSERT_EQ(cli(att, &b), kExitOk);
  EXPECT_EQ(a, b);
  auto other = att;
  other.back() = "5";
  ASSERT_EQ(cli(other, &c), kExitOk);
  EXPECT_NE(a, c);
  EXPECT_FALSE(json::parse(a)["edge_flips"].empty());
}

TEST(Cli, RunAndReport) {
  TempDir dir;
  json j = small_config();
  j["seeds"] = {1};
  j["output_dir"] = "out";
  std::ofstream(dir / "exp.json") << j.dump();
  std::string out;
  ASSERT_EQ(cli({"run", "--config", (dir / "exp.json").string(), "--quiet", "--threads", "1"}, &out), kExitOk);
  const json res = json::parse(out);
  EXPECT_EQ(res["rows"], 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "perturbations"));

  std::string rep;
  ASSERT_EQ(cli({"report", "--in", (dir / "out" / "report.json").string()}, &rep), kExitOk);
  EXPECT_EQ(json::parse(rep)["content_hash"], res["content_hash"]);
}

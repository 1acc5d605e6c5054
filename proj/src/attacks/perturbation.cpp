#include "poisonbench/attacks/perturbation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "poisonbench/embed/vocab.hpp"

namespace poisonbench {

std::string to_string(FlipKind kind) { return kind == FlipKind::add ? "add" : "remove"; }

std::string to_string(StructuralMode mode) {
  return mode == StructuralMode::global_rate ? "global_rate" : "per_target";
}

void BudgetSpec::validate() const {
  if (!(global_rate >= 0.0 && global_rate <= 1.0)) throw ConfigError("budget: global_rate must lie in [0, 1]");
  if (per_target < 1 || per_target > 5) throw ConfigError("budget: per_target must lie in [1, 5]");
  if (textual_edits_per_node < 0) throw ConfigError("budget: textual_edits_per_node must be non-negative");
}

std::size_t BudgetSpec::max_flips(std::size_t num_edges, std::size_t num_targets) const {
  if (structural_mode == StructuralMode::global_rate) return floor_fraction(global_rate, num_edges);
  return static_cast<std::size_t>(per_target) * num_targets;
}

namespace {

nlohmann::json budget_to_json(const BudgetSpec& b) {
  return {{"structural_mode", to_string(b.structural_mode)},
          {"global_rate", b.global_rate},
          {"per_target", b.per_target},
          {"textual_edits_per_node", b.textual_edits_per_node}};
}

BudgetSpec budget_from_json(const nlohmann::json& j) {
  BudgetSpec b;
  const auto mode = j.value("structural_mode", std::string("global_rate"));
  if (mode == "global_rate") b.structural_mode = StructuralMode::global_rate;
  else if (mode == "per_target") b.structural_mode = StructuralMode::per_target;
  else throw ConfigError("budget: unknown structural_mode '" + mode + "'");
  b.global_rate = j.value("global_rate", 0.0);
  b.per_target = j.value("per_target", 1);
  b.textual_edits_per_node = j.value("textual_edits_per_node", 0);
  b.validate();
  return b;
}

nlohmann::json body_json(const PerturbationSet& p) {
  nlohmann::json flips = nlohmann::json::array();
  for (const auto& f : p.edge_flips) flips.push_back({f.u, f.v, to_string(f.kind)});
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : p.text_edits) edits.push_back({e.node, e.op, e.position, e.payload});
  return {{"attack", p.attack_name}, {"seed", p.seed},          {"budget", budget_to_json(p.budget)},
          {"targets", p.targets},    {"edge_flips", flips},     {"text_edits", edits},
          {"warnings", p.warnings}};
}

}  // namespace

std::string PerturbationSet::content_hash() const { return fnv1a_hex(body_json(*this).dump()); }

nlohmann::json to_json(const PerturbationSet& pset) {
  auto j = body_json(pset);
  j["content_hash"] = pset.content_hash();
  return j;
}

PerturbationSet perturbation_from_json(const nlohmann::json& j) {
  PerturbationSet p;
  try {
    p.attack_name = j.at("attack").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.budget = budget_from_json(j.at("budget"));
    p.targets = j.value("targets", std::vector<NodeId>{});
    for (const auto& f : j.at("edge_flips")) {
      const auto kind = f.at(2).get<std::string>();
      if (kind != "add" && kind != "remove") throw ValidationError("perturbation: unknown flip kind '" + kind + "'");
      p.edge_flips.push_back({f.at(0).get<NodeId>(), f.at(1).get<NodeId>(), kind == "add" ? FlipKind::add : FlipKind::remove});
    }
    for (const auto& e : j.at("text_edits")) {
      p.text_edits.push_back({e.at(0).get<NodeId>(), e.at(1).get<std::string>(), e.at(2).get<std::size_t>(),
                              e.at(3).get<std::string>()});
    }
    p.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("perturbation: malformed JSON: ") + e.what());
  }
  if (j.contains("content_hash") && j["content_hash"].get<std::string>() != p.content_hash()) {
    throw ValidationError("perturbation: content hash mismatch");
  }
  return p;
}

void save_perturbation(const PerturbationSet& pset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(pset).dump(2) << '\n';
}

PerturbationSet load_perturbation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return perturbation_from_json(j);
}

void PerturbationSet::validate(const TextAttributedGraph& graph) const {
  budget.validate();
  const std::size_t n = graph.num_nodes();
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& f : edge_flips) {
    if (f.u >= n || f.v >= n) {
      throw ValidationError("perturbation: flip (" + std::to_string(f.u) + ", " + std::to_string(f.v) +
                            ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (f.u >= f.v) throw ValidationError("perturbation: flips must satisfy u < v");
    if (!seen.insert({f.u, f.v}).second) throw ValidationError("perturbation: duplicate flip of a pair");
    const bool present = graph.has_edge(f.u, f.v);
    if (present != (f.kind == FlipKind::remove)) {
      throw ValidationError("perturbation: flip (" + std::to_string(f.u) + ", " + std::to_string(f.v) + ", " +
                            to_string(f.kind) + ") does not match the graph");
    }
  }
  if (edge_flips.size() > budget.max_flips(graph.num_edges(), targets.size())) {
    throw ValidationError("perturbation: " + std::to_string(edge_flips.size()) + " flips exceed the budget");
  }
  std::map<NodeId, int> per_node;
  for (const auto& e : text_edits) {
    if (e.node >= n) throw ValidationError("perturbation: text edit on node " + std::to_string(e.node) + " out of range");
    if (++per_node[e.node] > budget.textual_edits_per_node) {
      throw ValidationError("perturbation: node " + std::to_string(e.node) + " exceeds the textual budget");
    }
  }
}

EdgeFlip toggle(const TextAttributedGraph& graph, NodeId a, NodeId b) {
  const Edge e = Edge::canonical(a, b);
  return {e.u, e.v, graph.has_edge(e.u, e.v) ? FlipKind::remove : FlipKind::add};
}

std::vector<std::string> apply_text_edits(std::vector<std::string> texts, std::span<const TextEdit> edits) {
  for (const auto& e : edits) {
    if (e.node >= texts.size()) throw ValidationError("text edit: node " + std::to_string(e.node) + " out of range");
    std::string& t = texts[e.node];
    auto bad = [&] {
      return ValidationError("text edit: " + e.op + " at " + std::to_string(e.position) + " is invalid for node " +
                             std::to_string(e.node));
    };
    if (e.op == "swap") {
      if (e.position + 1 >= t.size()) throw bad();
      std::swap(t[e.position], t[e.position + 1]);
    } else if (e.op == "sub") {
      if (e.position >= t.size() || e.payload.size() != 1) throw bad();
      t[e.position] = e.payload[0];
    } else if (e.op == "del") {
      if (e.position >= t.size()) throw bad();
      t.erase(e.position, 1);
    } else if (e.op == "ins") {
      if (e.position > t.size() || e.payload.size() != 1) throw bad();
      t.insert(e.position, e.payload);
    } else if (e.op == "word") {
      const auto spans = tokenize_spans(t);
      const auto it = std::find_if(spans.begin(), spans.end(), [&](const TokenSpan& s) { return s.begin == e.position; });
      if (it == spans.end() || e.payload.empty()) throw bad();
      t.replace(it->begin, it->length, e.payload);
    } else {
      throw ValidationError("text edit: unknown op '" + e.op + "'");
    }
  }
  return texts;
}

TextAttributedGraph apply_perturbation(const TextAttributedGraph& graph, const PerturbationSet& pset) {
  const std::size_t n = graph.num_nodes();
  for (const auto& f : pset.edge_flips) {
    if (f.u >= n || f.v >= n || f.u == f.v) {
      throw ValidationError("apply_perturbation: flip (" + std::to_string(f.u) + ", " + std::to_string(f.v) +
                            ") is out of range");
    }
  }
  std::set<Edge> edges(graph.edges().begin(), graph.edges().end());
  for (const auto& f : pset.edge_flips) {
    const Edge e = Edge::canonical(f.u, f.v);
    const bool changed = f.kind == FlipKind::add ? edges.insert(e).second : edges.erase(e) == 1;
    if (!changed) {
      throw ValidationError("apply_perturbation: flip (" + std::to_string(f.u) + ", " + std::to_string(f.v) + ", " +
                            to_string(f.kind) + ") does not change the graph");
    }
  }
  const std::vector<Edge> list(edges.begin(), edges.end());
  if (pset.text_edits.empty()) return graph.with_edges(list);
  return graph.with_edges(list).with_texts(apply_text_edits(graph.texts(), pset.text_edits));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  }
  return d[n][m];
}

}  // namespace poisonbench

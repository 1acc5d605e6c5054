#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

enum class FlipKind { add, remove };

struct EdgeFlip {
  NodeId u = 0;  // u < v
  NodeId v = 0;
  FlipKind kind = FlipKind::add;

  auto operator<=>(const EdgeFlip&) const = default;
};

/// One character- or word-level text edit, applied in list order. `position` is a
/// byte offset into the text as left by the preceding edits of the same node.
///   swap  exchange bytes position and position+1
///   sub   replace the byte at position with payload (one byte)
///   del   delete the byte at position
///   ins   insert payload (one byte) before position
///   word  replace the token starting at position with payload
struct TextEdit {
  NodeId node = 0;
  std::string op;
  std::size_t position = 0;
  std::string payload;

  bool operator==(const TextEdit&) const = default;
};

enum class StructuralMode { global_rate, per_target };

struct BudgetSpec {
  StructuralMode structural_mode = StructuralMode::global_rate;
  double global_rate = 0.0;  // fraction of |E|
  int per_target = 1;        // flips per target node, 1..5
  int textual_edits_per_node = 0;

  void validate() const;
  /// floor(global_rate * num_edges) or per_target * num_targets.
  std::size_t max_flips(std::size_t num_edges, std::size_t num_targets) const;
  bool operator==(const BudgetSpec&) const = default;
};

/// Budgeted poisoning of one graph, as produced by an attack.
struct PerturbationSet {
  std::string attack_name;
  std::uint64_t seed = 0;
  BudgetSpec budget;
  std::vector<NodeId> targets;  // per-target attacks only
  std::vector<EdgeFlip> edge_flips;
  std::vector<TextEdit> text_edits;
  std::vector<std::string> warnings;  // partial budgets, skipped nodes

  /// FNV-1a over the canonical JSON without the hash field.
  std::string content_hash() const;
  /// Checks the flips against `graph`: endpoints in range, no duplicates, removals of
  /// present edges, additions of absent pairs, budget respected. Throws ValidationError.
  void validate(const TextAttributedGraph& graph) const;

  bool operator==(const PerturbationSet&) const = default;
};

nlohmann::json to_json(const PerturbationSet& pset);
PerturbationSet perturbation_from_json(const nlohmann::json& j);
void save_perturbation(const PerturbationSet& pset, const std::filesystem::path& path);
PerturbationSet load_perturbation(const std::filesystem::path& path);

std::string to_string(FlipKind kind);
std::string to_string(StructuralMode mode);

/// Applies the text edits in order. Throws ValidationError on an out-of-range node or
/// position, or an unknown op.
std::vector<std::string> apply_text_edits(std::vector<std::string> texts, std::span<const TextEdit> edits);

/// Graph with the flips and text edits applied. Everything is checked before the new
/// graph is built, so a bad set leaves nothing half-applied.
TextAttributedGraph apply_perturbation(const TextAttributedGraph& graph, const PerturbationSet& pset);

/// Edge flip that toggles the state of pair (a, b) in `graph`.
EdgeFlip toggle(const TextAttributedGraph& graph, NodeId a, NodeId b);

/// Optimal-string-alignment distance (adjacent transposition counts 1).
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace poisonbench

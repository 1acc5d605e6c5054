#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "poisonbench/tagraph/graph.hpp"

namespace poisonbench {

/// Names of the three data files inside a graph directory.
inline constexpr std::string_view kEdgeFile = "edges.tsv";
inline constexpr std::string_view kTextFile = "texts.txt";
inline constexpr std::string_view kLabelFile = "labels.txt";
inline constexpr std::string_view kGraphManifest = "manifest.json";

/// Reads an edge list ("u<TAB>v" per line, '#' comments), a text file (one escaped
/// line per node) and a label file ("C=<k>" header, one integer per line).
/// Reversed duplicates are merged, self-loops dropped; both are counted in `report`.
TextAttributedGraph load_graph(const std::filesystem::path& edge_path, const std::filesystem::path& text_path,
                               const std::filesystem::path& label_path, BuildReport* report = nullptr);

/// Loads `dir/{edges.tsv,texts.txt,labels.txt}`; checks the manifest checksum when present.
TextAttributedGraph load_graph_dir(const std::filesystem::path& dir, BuildReport* report = nullptr);

/// Writes the three data files plus manifest.json (counts and checksum) into `dir`.
void save_graph(const TextAttributedGraph& graph, const std::filesystem::path& dir);

/// Backslash escaping for text lines: "\\", "\t", "\n", "\r".
std::string escape_text(std::string_view raw);
std::string unescape_text(std::string_view escaped);

/// Checksum over the three data files, as stored in the manifest.
std::string graph_checksum(const std::filesystem::path& dir);

}  // namespace poisonbench

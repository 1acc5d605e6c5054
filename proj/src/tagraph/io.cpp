#include "poisonbench/tagraph/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace poisonbench {
namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::string read_all(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_text(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    char c = escaped[i];
    if (c == '\\' && i + 1 < escaped.size()) {
      const char n = escaped[++i];
      switch (n) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case '\\': out += '\\'; break;
        default:
          out += '\\';
          out += n;
      }
    } else {
      out += c;
    }
  }
  return out;
}

TextAttributedGraph load_graph(const fs::path& edge_path, const fs::path& text_path, const fs::path& label_path,
                               BuildReport* report) {
  // Labels first: they fix the node count.
  std::vector<ClassId> labels;
  int num_classes = 0;
  {
    std::ifstream in = open_in(label_path);
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty()) continue;
      if (!header) {
        if (t.substr(0, 2) != "C=" || !parse_int(t.substr(2), num_classes) || num_classes < 1) {
          throw ParseError(label_path.string(), lineno, "expected header \"C=<num_classes>\"");
        }
        header = true;
        continue;
      }
      ClassId y = 0;
      if (!parse_int(t, y)) throw ParseError(label_path.string(), lineno, "expected an integer label");
      labels.push_back(y);
    }
    if (!header) throw ParseError(label_path.string(), lineno + 1, "missing \"C=<num_classes>\" header");
  }
  const std::size_t n = labels.size();

  std::vector<std::string> texts;
  texts.reserve(n);
  {
    std::ifstream in = open_in(text_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      texts.push_back(unescape_text(line));
    }
  }

  std::vector<std::pair<NodeId, NodeId>> pairs;
  {
    std::ifstream in = open_in(edge_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view t = trim(line);
      if (const auto hash = t.find('#'); hash != std::string_view::npos) t = trim(t.substr(0, hash));
      if (t.empty()) continue;
      const auto sep = t.find_first_of(" \t");
      if (sep == std::string_view::npos) throw ParseError(edge_path.string(), lineno, "expected \"u<TAB>v\"");
      const auto a_tok = t.substr(0, sep);
      const auto b_tok = trim(t.substr(sep));
      NodeId a = 0, b = 0;
      if (!parse_int(a_tok, a) || !parse_int(b_tok, b)) {
        throw ParseError(edge_path.string(), lineno, "expected two non-negative integer node ids");
      }
      pairs.emplace_back(a, b);
    }
  }
  return TextAttributedGraph::build(n, pairs, std::move(texts), std::move(labels), num_classes, report);
}

std::string graph_checksum(const fs::path& dir) {
  Fnv1a h;
  for (auto name : {kEdgeFile, kTextFile, kLabelFile}) {
    h.update(read_all(dir / name));
    h.update(std::string_view("\0", 1));
  }
  return h.hex();
}

TextAttributedGraph load_graph_dir(const fs::path& dir, BuildReport* report) {
  if (fs::exists(dir / kGraphManifest)) {
    const auto manifest = nlohmann::json::parse(read_all(dir / kGraphManifest));
    if (manifest.contains("checksum") && manifest["checksum"].get<std::string>() != graph_checksum(dir)) {
      throw ValidationError("checksum mismatch for graph directory " + dir.string());
    }
  }
  return load_graph(dir / kEdgeFile, dir / kTextFile, dir / kLabelFile, report);
}

void save_graph(const TextAttributedGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / kEdgeFile, std::ios::binary);
    for (const Edge& e : graph.edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out(dir / kTextFile, std::ios::binary);
    for (const auto& t : graph.texts()) out << escape_text(t) << '\n';
  }
  {
    std::ofstream out(dir / kLabelFile, std::ios::binary);
    out << "C=" << graph.num_classes() << '\n';
    for (ClassId y : graph.labels()) out << y << '\n';
  }
  nlohmann::json manifest = {
      {"num_nodes", graph.num_nodes()},
      {"num_edges", graph.num_edges()},
      {"num_classes", graph.num_classes()},
      {"files", {kEdgeFile, kTextFile, kLabelFile}},
      {"checksum", graph_checksum(dir)},
  };
  std::ofstream(dir / kGraphManifest, std::ios::binary) << manifest.dump(2) << '\n';
}

}  // namespace poisonbench

#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "poisonbench/tagraph/graph.hpp"

namespace pbtest {

using namespace poisonbench;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pbtest-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Erdos-Renyi graph with random labels and short texts drawn from a tiny vocabulary.
inline TextAttributedGraph random_graph(std::size_t n, double p, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(p);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (edge(rng)) pairs.emplace_back(u, v);
    }
  }
  static const char* words[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"};
  std::uniform_int_distribution<int> w(0, 7);
  std::vector<std::string> texts(n);
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = cls(rng);
    for (int k = 0; k < 4; ++k) texts[i] += std::string(k ? " " : "") + words[w(rng)];
  }
  return TextAttributedGraph::build(n, pairs, std::move(texts), std::move(labels), classes);
}

}  // namespace pbtest

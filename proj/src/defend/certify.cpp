#include "poisonbench/defend/certify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

namespace poisonbench {

void SmoothingConfig::validate() const {
  if (!(p_del > 0.0 && p_del < 1.0)) throw ConfigError("smoothing: p_del must lie in (0, 1)");
  if (p_add != 0.0) throw ConfigError("smoothing: only deletion noise is supported (p_add = 0)");
  if (num_samples < 100) throw ConfigError("smoothing: num_samples must be at least 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("smoothing: alpha must lie in (0, 1)");
}

std::vector<Edge> sample_deleted_edges(std::span<const Edge> edges, double p_del, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - p_del);
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) {
    if (keep(rng)) out.push_back(e);
  }
  return out;
}

TextAttributedGraph sample_deleted_graph(const TextAttributedGraph& graph, double p_del, Rng& rng) {
  if (!(p_del > 0.0 && p_del < 1.0)) throw ConfigError("sample_deleted_graph: p_del must lie in (0, 1)");
  return graph.with_edges(sample_deleted_edges(graph.edges(), p_del, rng));
}

double clopper_pearson_lower(std::size_t k, std::size_t n, double alpha) {
  if (n == 0 || k > n) throw ValidationError("clopper_pearson_lower: need 0 <= k <= n and n > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("clopper_pearson_lower: alpha must lie in (0, 1)");
  if (k == 0) return 0.0;
  if (k == n) return std::pow(alpha, 1.0 / static_cast<double>(n));
  return boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(n - k + 1), alpha);
}

int certified_radius(double p_lower, double p_del) {
  if (!(p_del > 0.0 && p_del < 1.0)) throw ConfigError("certified_radius: p_del must lie in (0, 1)");
  // the bound 1 - p_del^r / 2 climbs to 1, so the loop ends once p_del^r underflows
  int r = 0;
  while (p_lower > 1.0 - 0.5 * std::pow(p_del, r + 1)) ++r;
  return r;
}

std::vector<std::vector<std::size_t>> smoothed_counts(const BaseClassifier& clf, std::span<const Edge> edges,
                                                      std::span<const NodeId> nodes, const SmoothingConfig& cfg) {
  cfg.validate();
  const auto classes = static_cast<std::size_t>(clf.num_classes());
  for (NodeId v : nodes) {
    if (v >= clf.num_nodes()) throw ValidationError("smoothing: node " + std::to_string(v) + " out of range");
  }
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.num_samples)));
  std::vector<std::vector<std::size_t>> partial(workers, std::vector<std::size_t>(nodes.size() * classes, 0));
  auto run = [&](unsigned w) {
    auto& tally = partial[w];
    for (std::size_t i = w; i < cfg.num_samples; i += workers) {
      Rng rng(derive_seed(cfg.seed, i));
      const auto kept = sample_deleted_edges(edges, cfg.p_del, rng);
      const auto pred = clf.classify(kept);
      for (std::size_t j = 0; j < nodes.size(); ++j) ++tally[j * classes + static_cast<std::size_t>(pred[nodes[j]])];
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  std::vector<std::vector<std::size_t>> counts(nodes.size(), std::vector<std::size_t>(classes, 0));
  for (const auto& tally : partial) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      for (std::size_t c = 0; c < classes; ++c) counts[j][c] += tally[j * classes + c];
    }
  }
  return counts;
}

namespace {

SmoothedPrediction from_counts(const std::vector<std::size_t>& counts, const SmoothingConfig& cfg) {
  SmoothedPrediction p;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > p.count) {
      p.count = counts[c];
      p.cls = static_cast<ClassId>(c);
    }
  }
  p.p_lower = clopper_pearson_lower(p.count, cfg.num_samples, cfg.alpha);
  return p;
}

}  // namespace

SmoothedPrediction smoothed_predict(const BaseClassifier& clf, const TextAttributedGraph& graph, NodeId node,
                                    const SmoothingConfig& cfg) {
  const NodeId nodes[] = {node};
  return from_counts(smoothed_counts(clf, graph.edges(), nodes, cfg).front(), cfg);
}

CertResult certify_set(const BaseClassifier& clf, const TextAttributedGraph& graph, std::span<const NodeId> nodes,
                       std::span<const ClassId> labels, const SmoothingConfig& cfg) {
  if (nodes.empty()) throw ValidationError("certify_set: empty node set");
  if (labels.size() != graph.num_nodes()) throw ValidationError("certify_set: label count does not match the graph");
  const auto counts = smoothed_counts(clf, graph.edges(), nodes, cfg);
  std::vector<ClassId> base;
  if (cfg.base_correctness) base = clf.classify(graph.edges());

  CertResult out;
  out.config = cfg;
  std::size_t certified = 0;
  double radius_sum = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const auto p = from_counts(counts[j], cfg);
    NodeCertificate nc;
    nc.node = nodes[j];
    nc.pred = p.cls;
    nc.count = p.count;
    nc.p_lower = p.p_lower;
    nc.correct = (cfg.base_correctness ? base[nodes[j]] : p.cls) == labels[nodes[j]];
    nc.radius = certified_radius(p.p_lower, cfg.p_del);
    if (nc.correct && nc.radius >= 1) {
      ++certified;
      radius_sum += nc.radius;
    }
    out.nodes.push_back(nc);
  }
  const auto total = static_cast<double>(nodes.size());
  out.ca = 100.0 * static_cast<double>(certified) / total;
  out.mcr = radius_sum / total;
  out.mcr_certified_only = certified ? radius_sum / static_cast<double>(certified) : 0.0;
  return out;
}

void write_certificate_csv(const CertResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "node,pred,correct,count,p_lower,radius\n";
  char buf[64];
  for (const auto& n : result.nodes) {
    std::snprintf(buf, sizeof buf, "%.10f", n.p_lower);
    out << n.node << ',' << n.pred << ',' << (n.correct ? 1 : 0) << ',' << n.count << ',' << buf << ',' << n.radius
        << '\n';
  }
}

nlohmann::json certificate_summary(const CertResult& result) {
  const auto& c = result.config;
  return {{"CA", result.ca},
          {"MCR", result.mcr},
          {"MCR_certified_only", result.mcr_certified_only},
          {"config",
           {{"p_del", c.p_del},
            {"p_add", c.p_add},
            {"num_samples", c.num_samples},
            {"alpha", c.alpha},
            {"seed", c.seed},
            {"correctness", c.base_correctness ? "base" : "smoothed"}}}};
}

}  // namespace poisonbench

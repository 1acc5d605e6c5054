#pragma once

// Analytic loss gradients of a victim network against central finite differences.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "poisonbench/embed/embedding.hpp"
#include "poisonbench/tagraph/sampling.hpp"
#include "poisonbench/victims/network.hpp"

namespace pbtest {

struct Toy {
  TextAttributedGraph graph;
  EmbeddingMatrix features;
  NodeSplit split;
};

// 10 nodes, dense random features, every node labeled for the loss
inline Toy toy(std::uint64_t seed) {
  auto g = random_graph(10, 0.3, 3, seed);
  Rng rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(10, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  NodeSplit s;
  for (NodeId v = 0; v < 10; ++v) (v < 6 ? s.train : v < 8 ? s.val : s.test).push_back(v);
  return {g, {x, "toy"}, s};
}

struct GradCheck {
  std::size_t checked = 0;
  std::vector<std::string> mismatches;
};

// Relative tolerance 1e-4 with step 1e-6.
inline GradCheck gradient_check(GnnKind kind, std::uint64_t seed) {
  auto t = toy(seed);
  GnnArch arch{.kind = kind, .hidden = 4, .heads_layer1 = 2, .heads_layer2 = 1};
  auto ops = GraphOperators<double>::build(kind, 10, t.graph.edges());
  FeatureInput<double> x(t.features.values);
  auto params = init_parameters<double>(arch, 6, 3, seed);
  // move biases off zero so no unit sits on an activation kink
  Rng rng(seed + 100);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (auto& p : params) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += jitter(rng);
  }
  const double wd = 5e-4;
  auto grads = zeros_like(params);
  loss_and_gradient(arch, ops, x, t.graph.labels(), t.split.train, params, wd, &grads);

  const double h = 1e-6;
  ParameterList<double>* none = nullptr;
  GradCheck out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Eigen::Index i = 0; i < params[k].value.size(); ++i) {
      auto plus = params, minus = params;
      plus[k].value.data()[i] += h;
      minus[k].value.data()[i] -= h;
      const double fp = loss_and_gradient(arch, ops, x, t.graph.labels(), t.split.train, plus, wd, none);
      const double fm = loss_and_gradient(arch, ops, x, t.graph.labels(), t.split.train, minus, wd, none);
      const double fd = (fp - fm) / (2 * h);
      const double an = grads[k].value.data()[i];
      if (std::abs(an - fd) > 1e-4 * std::max(std::abs(an), std::abs(fd)) + 1e-8) {
        out.mismatches.push_back(params[k].name + "[" + std::to_string(i) + "] analytic " + std::to_string(an) +
                                 " fd " + std::to_string(fd));
      }
      ++out.checked;
    }
  }
  return out;
}

}  // namespace pbtest

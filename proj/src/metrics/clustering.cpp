#include "poisonbench/metrics/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace poisonbench {

namespace {

double distance(const Eigen::MatrixXd& emb, Eigen::Index i, Eigen::Index j) {
  return (emb.row(i) - emb.row(j)).norm();
}

void check_labels(const Eigen::MatrixXd& emb, std::span<const ClassId> labels) {
  if (static_cast<std::size_t>(emb.rows()) != labels.size()) {
    throw ValidationError("metrics: embedding has " + std::to_string(emb.rows()) + " rows but " +
                          std::to_string(labels.size()) + " labels were given");
  }
}

// Dense 0-based ids for arbitrary labels, in order of first appearance.
std::vector<int> compact(std::span<const int> values, int& count) {
  std::vector<int> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  count = static_cast<int>(sorted.size());
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
  }
  return out;
}

double entropy(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

std::size_t distinct_rows(const Eigen::MatrixXd& emb) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(emb.rows()));
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < emb.cols(); ++c) {
      if (emb(a, c) != emb(b, c)) return emb(a, c) < emb(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (row_less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

}  // namespace

double davies_bouldin(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, int num_classes) {
  check_labels(emb, labels);
  if (num_classes < 2) throw ValidationError("davies_bouldin: needs at least two classes");
  const auto k = static_cast<std::size_t>(num_classes);
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(num_classes, emb.cols());
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw ValidationError("davies_bouldin: label out of range");
    centroids.row(labels[i]) += emb.row(static_cast<Eigen::Index>(i));
    ++count[static_cast<std::size_t>(labels[i])];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) throw ValidationError("davies_bouldin: class " + std::to_string(c) + " has no points");
    centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(count[c]);
  }
  std::vector<double> scatter(k, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    scatter[static_cast<std::size_t>(labels[i])] += (emb.row(static_cast<Eigen::Index>(i)) - centroids.row(labels[i])).norm();
  }
  for (std::size_t c = 0; c < k; ++c) scatter[c] /= static_cast<double>(count[c]);

  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double worst = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double sep = (centroids.row(static_cast<Eigen::Index>(a)) - centroids.row(static_cast<Eigen::Index>(b))).norm();
      if (sep > 0) worst = std::max(worst, (scatter[a] + scatter[b]) / sep);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

double silhouette(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, std::size_t sample_cap,
                  std::uint64_t seed) {
  check_labels(emb, labels);
  const std::size_t n = labels.size();
  std::vector<Eigen::Index> sample(n);
  std::iota(sample.begin(), sample.end(), 0);
  if (sample_cap > 0 && n > sample_cap) {
    Rng rng(seed);
    for (std::size_t i = 0; i < sample_cap; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(sample[i], sample[pick(rng)]);
    }
    sample.resize(sample_cap);
    std::sort(sample.begin(), sample.end());
  }

  std::vector<int> raw(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) raw[i] = labels[static_cast<std::size_t>(sample[i])];
  int num_clusters = 0;
  const std::vector<int> cluster = compact(raw, num_clusters);
  if (num_clusters < 2) throw ValidationError("silhouette: needs at least two classes");
  std::vector<std::size_t> size(static_cast<std::size_t>(num_clusters), 0);
  for (int c : cluster) ++size[static_cast<std::size_t>(c)];

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(num_clusters));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto own = static_cast<std::size_t>(cluster[i]);
    if (size[own] == 1) continue;  // singleton: s = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < sample.size(); ++j) {
      if (i != j) sums[static_cast<std::size_t>(cluster[j])] += distance(emb, sample[i], sample[j]);
    }
    const double a = sums[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return 100.0 * total / static_cast<double>(sample.size());
}

double embedding_homophily(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, int k) {
  check_labels(emb, labels);
  const std::size_t n = labels.size();
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw ValidationError("embedding_homophily: k must satisfy 1 <= k < N (k=" + std::to_string(k) +
                          ", N=" + std::to_string(n) + ")");
  }
  std::vector<std::pair<double, std::size_t>> dist;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back(distance(emb, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int r = 0; r < k; ++r) {
      if (labels[dist[static_cast<std::size_t>(r)].second] == labels[i]) ++agree;
    }
  }
  return 100.0 * static_cast<double>(agree) / (static_cast<double>(n) * k);
}

std::vector<int> kmeans(const Eigen::MatrixXd& emb, int k, std::uint64_t seed, int max_iterations) {
  const auto n = static_cast<std::size_t>(emb.rows());
  if (n == 0) return {};
  if (k < 1) throw ConfigError("kmeans: k must be positive");
  k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), distinct_rows(emb)));

  // k-means++ seeding
  Rng rng(seed);
  Eigen::MatrixXd centers(k, emb.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.row(0) = emb.row(static_cast<Eigen::Index>(first(rng)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (emb.row(static_cast<Eigen::Index>(i)) - centers.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    std::size_t chosen = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0) continue;
      chosen = i;
      target -= d2[i];
      if (target < 0) break;
    }
    centers.row(c) = emb.row(static_cast<Eigen::Index>(chosen));
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (emb.row(static_cast<Eigen::Index>(i)) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, emb.cols());
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(assign[i]) += emb.row(static_cast<Eigen::Index>(i));
      ++count[static_cast<std::size_t>(assign[i])];
    }
    // an emptied cluster keeps its previous center
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / static_cast<double>(count[static_cast<std::size_t>(c)]);
    }
  }
  return assign;
}

double normalized_mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("mutual information: length mismatch");
  if (a.empty()) throw ValidationError("mutual information: empty input");
  int ka = 0;
  int kb = 0;
  const auto ca = compact(a, ka);
  const auto cb = compact(b, kb);
  const auto total = static_cast<double>(a.size());
  std::vector<double> joint(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb), 0.0);
  std::vector<double> pa(static_cast<std::size_t>(ka), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(kb), 0.0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    joint[static_cast<std::size_t>(ca[i]) * static_cast<std::size_t>(kb) + static_cast<std::size_t>(cb[i])] += 1;
    pa[static_cast<std::size_t>(ca[i])] += 1;
    pb[static_cast<std::size_t>(cb[i])] += 1;
  }
  const double h = std::min(entropy(pa, total), entropy(pb, total));
  if (h <= 0) return 0.0;
  double mi = 0.0;
  for (int x = 0; x < ka; ++x) {
    for (int y = 0; y < kb; ++y) {
      const double c = joint[static_cast<std::size_t>(x) * static_cast<std::size_t>(kb) + static_cast<std::size_t>(y)];
      if (c > 0) mi += (c / total) * std::log(c * total / (pa[static_cast<std::size_t>(x)] * pb[static_cast<std::size_t>(y)]));
    }
  }
  return 100.0 * std::max(0.0, mi) / h;
}

std::vector<int> quantile_bins(std::span<const double> values, int bins) {
  if (bins < 2) throw ConfigError("quantile_bins: bins must be at least 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(values.size());
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto below = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
    out[i] = std::min(bins - 1, static_cast<int>(std::floor(bins * below / n)));
  }
  return out;
}

double elmi(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, int num_clusters, std::uint64_t seed,
            std::vector<std::string>* warnings) {
  check_labels(emb, labels);
  if (num_clusters < 2) throw ConfigError("elmi: num_clusters must be at least 2");
  const auto cells = kmeans(emb, num_clusters, seed);
  if (std::all_of(cells.begin(), cells.end(), [&](int c) { return c == cells.front(); })) {
    if (warnings) warnings->push_back("elmi: embedding collapsed to a single cluster, MI set to 0");
    return 0.0;
  }
  const std::vector<int> y(labels.begin(), labels.end());
  return normalized_mutual_information(cells, y);
}

}  // namespace poisonbench

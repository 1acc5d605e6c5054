#pragma once

// Embedding-quality scores computed against node labels. Every routine works in
// 64-bit and is deterministic; sampled or clustered scores take an explicit seed.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poisonbench/common.hpp"

namespace poisonbench {

/// Davies-Bouldin index over classes 0..num_classes-1 with Euclidean centroid
/// dispersion. Coincident centroids contribute a zero ratio. Throws ValidationError
/// when a class has no points or fewer than two classes are given.
double davies_bouldin(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, int num_classes);

/// Mean silhouette x100. Above `sample_cap` points a seeded uniform sample is scored
/// against itself. Singleton clusters score 0, as do points with a = b = 0.
double silhouette(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, std::size_t sample_cap = 2000,
                  std::uint64_t seed = 0);

/// Share (x100) of each node's k nearest Euclidean neighbors carrying its label.
/// Self is excluded and distance ties go to the lower node id. Requires 1 <= k < N.
double embedding_homophily(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, int k = 10);

/// Lloyd's k-means with k-means++ seeding. `k` is capped at the number of distinct
/// rows; returns a cluster id per row.
std::vector<int> kmeans(const Eigen::MatrixXd& emb, int k, std::uint64_t seed, int max_iterations = 300);

/// I(a; b) / min(H(a), H(b)) x100 from the empirical joint table, in nats. Zero when
/// either variable is constant.
double normalized_mutual_information(std::span<const int> a, std::span<const int> b);

/// Bins values into `bins` quantile cells: bin = floor(bins * #{values < v} / N), so
/// equal values share a cell.
std::vector<int> quantile_bins(std::span<const double> values, int bins);

/// Normalized MI (x100) between k-means cells of the embedding and the labels.
/// A single-cell outcome gives 0 and a warning.
double elmi(const Eigen::MatrixXd& emb, std::span<const ClassId> labels, int num_clusters, std::uint64_t seed = 0,
            std::vector<std::string>* warnings = nullptr);

}  // namespace poisonbench

#pragma once

#include "otalign/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace otalign::data {

enum class CostMetric { SquaredEuclidean, CosineDistance };

struct Dataset {
  int n = 0;
  int m = 0;
  std::optional<Matrix> features_1;  // n x d
  std::optional<Matrix> features_2;  // m x d
  std::optional<GraphPair> graphs;
  std::optional<Matrix> cost;        // precomputed n x m
  SupervisionSet ground_truth;
  SupervisionSet prior;              // sampled prior supervision
  double prior_fraction = 0.0;
};

struct DatasetPaths {
  std::string graph_1;
  std::string graph_2;
  std::string features_1;
  std::string features_2;
  std::string cost;
  std::string ground_truth;
};

// File formats (plain text, full double round-trip):
//   graphs:        one edge per line, "i j" or "i j weight", undirected
//   features/cost: header line "rows cols", then one comma-separated row per line
//   ground truth:  one "i j" pair per line, at most one per source
Dataset load_dataset(const DatasetPaths& paths, double prior_fraction = 0.0,
                     std::uint64_t seed = 0);

SparseMatrix load_edge_list(const std::string& path);
Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Matrix& matrix);
SupervisionSet load_pairs(const std::string& path, int n, int m);
void save_pairs(const std::string& path, const SupervisionSet& pairs);

// C[i,j] = ||x_i - y_j||^2, or 1 - cos(x_i, y_j) in [0, 2]. Cosine rejects
// zero-norm rows, naming the offending row.
Matrix cost_from_features(const Matrix& features_1, const Matrix& features_2,
                          CostMetric metric);

// Uniform sample of ground-truth pairs (without replacement) as prior
// supervision.
SupervisionSet sample_prior(const SupervisionSet& ground_truth, double fraction,
                            std::uint64_t seed);

struct ErConfig {
  int n = 0;
  double avg_degree = 10.0;
  double edge_noise = 0.0;
  double feature_noise = 0.0;
};

// Benchmark instance: graph 1 ~ ER(n, avg_degree/(n-1)); graph 2 is a random
// permutation of graph 1 with each edge removed with prob edge_noise and the
// same number of random new edges added; features are 1-hop adjacency
// indicator rows (target rows mapped back through the permutation) plus
// Gaussian noise scaled by feature_noise; ground truth is the permutation.
Dataset generate_er_pair(const ErConfig& config, std::uint64_t seed);

}  // namespace otalign::data

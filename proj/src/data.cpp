#include "otalign/data.hpp"

#include "otalign/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <unordered_set>

namespace otalign::data {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open " + path);
  }
  return in;
}

[[noreturn]] void parse_fail(const std::string& path, int line_number, const std::string& what) {
  std::ostringstream oss;
  oss << path << ":" << line_number << ": " << what;
  throw Error(ErrorCode::ParseError, oss.str());
}

bool skippable(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

SparseMatrix load_edge_list(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_number = 0;
  int max_index = -1;
  std::vector<Eigen::Triplet<double>> triplets;
  while (std::getline(in, line)) {
    ++line_number;
    if (skippable(line)) continue;
    std::istringstream tokens(line);
    long long i = -1;
    long long j = -1;
    double weight = 1.0;
    if (!(tokens >> i >> j)) parse_fail(path, line_number, "expected 'i j [weight]'");
    tokens >> weight;  // optional
    std::string trailing;
    if (tokens >> trailing) parse_fail(path, line_number, "unexpected trailing token");
    if (i < 0 || j < 0) parse_fail(path, line_number, "negative node index");
    if (i == j) parse_fail(path, line_number, "self loop not allowed");
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      parse_fail(path, line_number, "edge weight must be finite and non-negative");
    }
    max_index = std::max<long long>(max_index, std::max(i, j));
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), weight);
    triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), weight);
  }
  const int node_count = max_index + 1;
  SparseMatrix adjacency(node_count, node_count);
  adjacency.setFromTriplets(triplets.begin(), triplets.end(),
                            [](double, double b) { return b; });  // last write wins
  return adjacency;
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_number = 0;

  int rows = 0;
  int cols = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (skippable(line)) continue;
    std::istringstream header(line);
    if (!(header >> rows >> cols) || rows <= 0 || cols <= 0) {
      parse_fail(path, line_number, "expected header 'rows cols'");
    }
    break;
  }
  if (rows == 0) parse_fail(path, line_number, "missing header");

  Matrix matrix(rows, cols);
  int row = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (skippable(line)) continue;
    if (row >= rows) parse_fail(path, line_number, "more rows than declared");
    std::istringstream fields(line);
    std::string field;
    for (int col = 0; col < cols; ++col) {
      if (!std::getline(fields, field, ',')) {
        parse_fail(path, line_number, "expected " + std::to_string(cols) + " fields");
      }
      try {
        std::size_t used = 0;
        matrix(row, col) = std::stod(field, &used);
      } catch (const std::exception&) {
        parse_fail(path, line_number, "bad number '" + field + "'");
      }
    }
    if (std::getline(fields, field, ',')) {
      parse_fail(path, line_number, "more fields than declared");
    }
    ++row;
  }
  if (row != rows) parse_fail(path, line_number, "fewer rows than declared");
  return matrix;
}

void save_matrix_csv(const std::string& path, const Matrix& matrix) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << matrix.rows() << " " << matrix.cols() << "\n";
  out << std::setprecision(17);
  for (int i = 0; i < matrix.rows(); ++i) {
    for (int j = 0; j < matrix.cols(); ++j) {
      if (j) out << ",";
      out << matrix(i, j);
    }
    out << "\n";
  }
}

SupervisionSet load_pairs(const std::string& path, int n, int m) {
  std::ifstream in = open_or_throw(path);
  SupervisionSet pairs(n, m);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (skippable(line)) continue;
    std::istringstream tokens(line);
    int i = -1;
    int j = -1;
    if (!(tokens >> i >> j)) parse_fail(path, line_number, "expected 'i j'");
    try {
      pairs.add(i, j);
    } catch (const Error& e) {
      parse_fail(path, line_number, e.what());
    }
  }
  return pairs;
}

void save_pairs(const std::string& path, const SupervisionSet& pairs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  for (const auto& [i, j] : pairs.pairs()) out << i << " " << j << "\n";
}

namespace {

// k-major accumulation; pays O(sum_k nnz1(k) * nnz2(k)) instead of the dense
// O(n*m*d) product. Worth it for indicator-style features.
Matrix sparse_cross_product(const Matrix& features_1, const Matrix& features_2) {
  const int n = static_cast<int>(features_1.rows());
  const int m = static_cast<int>(features_2.rows());
  const int d = static_cast<int>(features_1.cols());
  Matrix cross = Matrix::Zero(n, m);
  std::vector<std::pair<int, double>> col_1, col_2;
  for (int k = 0; k < d; ++k) {
    col_1.clear();
    col_2.clear();
    for (int i = 0; i < n; ++i) {
      if (features_1(i, k) != 0.0) col_1.emplace_back(i, features_1(i, k));
    }
    for (int j = 0; j < m; ++j) {
      if (features_2(j, k) != 0.0) col_2.emplace_back(j, features_2(j, k));
    }
    for (const auto& [i, v] : col_1) {
      for (const auto& [j, w] : col_2) cross(i, j) += v * w;
    }
  }
  return cross;
}

double density(const Matrix& matrix) {
  long long nnz = 0;
  for (int i = 0; i < matrix.rows(); ++i) {
    for (int j = 0; j < matrix.cols(); ++j) {
      nnz += matrix(i, j) != 0.0;
    }
  }
  return static_cast<double>(nnz) / (static_cast<double>(matrix.rows()) * matrix.cols());
}

}  // namespace

Matrix cost_from_features(const Matrix& features_1, const Matrix& features_2,
                          CostMetric metric) {
  if (features_1.cols() != features_2.cols()) {
    std::ostringstream oss;
    oss << "feature dimensions differ: " << features_1.cols() << " vs " << features_2.cols();
    throw Error(ErrorCode::DimensionMismatch, oss.str());
  }
  const int n = static_cast<int>(features_1.rows());
  const int m = static_cast<int>(features_2.rows());

  Matrix f1 = features_1;
  Matrix f2 = features_2;
  if (metric == CostMetric::CosineDistance) {
    for (int i = 0; i < n; ++i) {
      const double norm = f1.row(i).norm();
      if (norm == 0.0) {
        throw Error(ErrorCode::ZeroNormFeature,
                    "features_1 row " + std::to_string(i) + " has zero norm");
      }
      f1.row(i) /= norm;
    }
    for (int j = 0; j < m; ++j) {
      const double norm = f2.row(j).norm();
      if (norm == 0.0) {
        throw Error(ErrorCode::ZeroNormFeature,
                    "features_2 row " + std::to_string(j) + " has zero norm");
      }
      f2.row(j) /= norm;
    }
  }

  const bool sparse = density(f1) < 0.05 && density(f2) < 0.05;
  Matrix cross = sparse ? sparse_cross_product(f1, f2) : Matrix(f1 * f2.transpose());

  Matrix cost(n, m);
  if (metric == CostMetric::SquaredEuclidean) {
    const Vector norms_1 = f1.rowwise().squaredNorm();
    const Vector norms_2 = f2.rowwise().squaredNorm();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        cost(i, j) = std::max(0.0, norms_1[i] + norms_2[j] - 2.0 * cross(i, j));
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        cost(i, j) = std::clamp(1.0 - cross(i, j), 0.0, 2.0);
      }
    }
  }
  return cost;
}

SupervisionSet sample_prior(const SupervisionSet& ground_truth, double fraction,
                            std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InfeasibleParameters, "prior fraction must lie in [0, 1)");
  }
  std::vector<std::pair<int, int>> pairs(ground_truth.pairs().begin(),
                                         ground_truth.pairs().end());
  std::mt19937_64 rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const int take = static_cast<int>(std::llround(fraction * pairs.size()));
  SupervisionSet prior(ground_truth.n(), ground_truth.m());
  for (int t = 0; t < take; ++t) prior.add(pairs[t].first, pairs[t].second);
  return prior;
}

Dataset generate_er_pair(const ErConfig& config, std::uint64_t seed) {
  if (config.n < 2) throw Error(ErrorCode::InfeasibleParameters, "need n >= 2");
  if (!(config.avg_degree > 0.0) || config.avg_degree >= config.n) {
    throw Error(ErrorCode::InfeasibleParameters, "avg_degree must lie in (0, n)");
  }
  if (!(config.edge_noise >= 0.0 && config.edge_noise < 1.0) ||
      !(config.feature_noise >= 0.0 && config.feature_noise < 1.0)) {
    throw Error(ErrorCode::InfeasibleParameters, "noise levels must lie in [0, 1)");
  }
  const int n = config.n;
  const double p = config.avg_degree / (n - 1);

  std::mt19937_64 edge_rng(derive_seed(seed, 11));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<int, int>> edges_1;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unit(edge_rng) < p) edges_1.emplace_back(i, j);
    }
  }

  std::vector<int> perm(n);  // node i in graph 1 <-> perm[i] in graph 2
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 perm_rng(derive_seed(seed, 12));
  std::shuffle(perm.begin(), perm.end(), perm_rng);

  // permuted copy with edge noise: drop each edge w.p. edge_noise, then add
  // the same number of fresh non-edges
  std::mt19937_64 noise_rng(derive_seed(seed, 13));
  auto key = [n](int u, int v) {
    if (u > v) std::swap(u, v);
    return static_cast<long long>(u) * n + v;
  };
  std::unordered_set<long long> edge_set_2;
  std::vector<std::pair<int, int>> edges_2;
  int removed = 0;
  for (const auto& [i, j] : edges_1) {
    const int u = perm[i];
    const int v = perm[j];
    if (unit(noise_rng) < config.edge_noise) {
      ++removed;
      continue;
    }
    edges_2.emplace_back(u, v);
    edge_set_2.insert(key(u, v));
  }
  std::uniform_int_distribution<int> node(0, n - 1);
  while (removed > 0) {
    const int u = node(noise_rng);
    const int v = node(noise_rng);
    if (u == v || edge_set_2.count(key(u, v))) continue;
    edges_2.emplace_back(u, v);
    edge_set_2.insert(key(u, v));
    --removed;
  }

  auto to_adjacency = [n](const std::vector<std::pair<int, int>>& edges) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * edges.size());
    for (const auto& [u, v] : edges) {
      triplets.emplace_back(u, v, 1.0);
      triplets.emplace_back(v, u, 1.0);
    }
    SparseMatrix adjacency(n, n);
    adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return adjacency;
  };

  Dataset dataset;
  dataset.n = n;
  dataset.m = n;
  dataset.graphs = GraphPair{to_adjacency(edges_1), to_adjacency(edges_2)};

  // indicator features; target rows are mapped back through the permutation
  // so that matched nodes see comparable coordinates
  Matrix f1 = Matrix::Zero(n, n);
  for (const auto& [i, j] : edges_1) {
    f1(i, j) = 1.0;
    f1(j, i) = 1.0;
  }
  Matrix f2 = Matrix::Zero(n, n);
  for (const auto& [u, v] : edges_2) {
    f2(u, v) = 1.0;
    f2(v, u) = 1.0;
  }
  Matrix f2_aligned(n, n);
  for (int c = 0; c < n; ++c) f2_aligned.col(c) = f2.col(perm[c]);
  if (config.feature_noise > 0.0) {
    std::mt19937_64 feature_rng(derive_seed(seed, 14));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) f1(i, j) += config.feature_noise * gauss(feature_rng);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) f2_aligned(i, j) += config.feature_noise * gauss(feature_rng);
    }
  }
  dataset.features_1 = std::move(f1);
  dataset.features_2 = std::move(f2_aligned);

  dataset.ground_truth = SupervisionSet(n, n);
  for (int i = 0; i < n; ++i) dataset.ground_truth.add(i, perm[i]);
  return dataset;
}

Dataset load_dataset(const DatasetPaths& paths, double prior_fraction, std::uint64_t seed) {
  Dataset dataset;
  if (!paths.graph_1.empty() != !paths.graph_2.empty()) {
    throw Error(ErrorCode::ConfigError, "graphs must be given as a pair");
  }
  if (!paths.features_1.empty() != !paths.features_2.empty()) {
    throw Error(ErrorCode::ConfigError, "features must be given as a pair");
  }
  if (paths.cost.empty() && paths.features_1.empty()) {
    throw Error(ErrorCode::ConfigError, "need a precomputed cost or a feature pair");
  }

  if (!paths.graph_1.empty()) {
    GraphPair graphs;
    graphs.adjacency_1 = load_edge_list(paths.graph_1);
    graphs.adjacency_2 = load_edge_list(paths.graph_2);
    validate_adjacency(graphs.adjacency_1);
    validate_adjacency(graphs.adjacency_2);
    dataset.n = static_cast<int>(graphs.adjacency_1.rows());
    dataset.m = static_cast<int>(graphs.adjacency_2.rows());
    dataset.graphs = std::move(graphs);
  }
  if (!paths.features_1.empty()) {
    dataset.features_1 = load_matrix_csv(paths.features_1);
    dataset.features_2 = load_matrix_csv(paths.features_2);
    if (dataset.features_1->cols() != dataset.features_2->cols()) {
      throw Error(ErrorCode::DimensionMismatch, "feature dimensions differ");
    }
    if (dataset.n == 0) {
      dataset.n = static_cast<int>(dataset.features_1->rows());
      dataset.m = static_cast<int>(dataset.features_2->rows());
    } else if (dataset.features_1->rows() != dataset.n ||
               dataset.features_2->rows() != dataset.m) {
      throw Error(ErrorCode::DimensionMismatch, "features do not match graph sizes");
    }
  }
  if (!paths.cost.empty()) {
    dataset.cost = load_matrix_csv(paths.cost);
    if (dataset.n == 0) {
      dataset.n = static_cast<int>(dataset.cost->rows());
      dataset.m = static_cast<int>(dataset.cost->cols());
    } else if (dataset.cost->rows() != dataset.n || dataset.cost->cols() != dataset.m) {
      throw Error(ErrorCode::DimensionMismatch, "cost does not match dataset sizes");
    }
  }
  if (!paths.ground_truth.empty()) {
    dataset.ground_truth = load_pairs(paths.ground_truth, dataset.n, dataset.m);
  } else {
    dataset.ground_truth = SupervisionSet(dataset.n, dataset.m);
  }
  dataset.prior_fraction = prior_fraction;
  dataset.prior = sample_prior(dataset.ground_truth, prior_fraction, derive_seed(seed, 21));
  return dataset;
}

}  // namespace otalign::data

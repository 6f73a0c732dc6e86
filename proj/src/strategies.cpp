#include "otalign/strategies.hpp"

#include "otalign/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace otalign::strategies {

namespace {

constexpr double kKlFloor = 1e-12;

double row_entropy(const Matrix& plan, int i) {
  double h = 0.0;
  for (int j = 0; j < plan.cols(); ++j) {
    const double t = plan(i, j);
    if (t > 0.0) h -= t * std::log(t);
  }
  return h;
}

// KL(p || q) between two plan rows normalized to distributions, with an
// additive floor before the logs.
double row_kl(const Matrix& plan, int i, int j) {
  const double si = plan.row(i).sum();
  const double sj = plan.row(j).sum();
  double kl = 0.0;
  for (int c = 0; c < plan.cols(); ++c) {
    const double p = plan(i, c) / si + kKlFloor;
    const double q = plan(j, c) / sj + kKlFloor;
    kl += p * std::log(p / q);
  }
  return kl;
}

double row_sq_distance(const Matrix& plan, int i, int j) {
  return (plan.row(i) - plan.row(j)).squaredNorm();
}

std::map<int, double> impact_scores(const StrategySpec& spec, const std::vector<int>& pool,
                                    const Coupling& coupling, ScoreContext& context) {
  if (!context.problem) {
    throw Error(ErrorCode::ConfigError, "impact scoring needs the alignment problem");
  }
  const AlignmentProblem& problem = *context.problem;
  const Marginals& marginals = problem.marginals;
  const bool posterior = spec.aggregation == ImpactAggregation::Posterior;
  Vector scores;

  if (context.dense_adjoint) {
    const Matrix grad_f = utility::gradient(spec.utility, coupling);
    const auto system = adjoint::AdjointSystem::dense(coupling, marginals, grad_f);
    adjoint::CgConfig cg;
    cg.tolerance = context.cg_tolerance;
    cg.max_iterations = context.cg_max_iterations;
    const adjoint::AdjointSolution solution = adjoint::cg_solve(system, cg);
    context.cg_iterations = solution.iterations;
    kernels::score_impacts_dense(coupling.values, problem.cost, grad_f, solution.y_alpha,
                                 solution.y_beta, problem.beta, problem.epsilon, posterior,
                                 scores);
  } else {
    // nothing here is larger than the support
    const std::vector<double> grad_values = utility::support_gradient(spec.utility, coupling);
    const auto system =
        adjoint::AdjointSystem::from_support_values(coupling, marginals, grad_values);
    adjoint::CgConfig cg;
    cg.tolerance = context.cg_tolerance;
    cg.max_iterations = context.cg_max_iterations;
    const adjoint::AdjointSolution solution = adjoint::cg_solve(system, cg);
    context.cg_iterations = solution.iterations;
    kernels::score_impacts_values(coupling.support, problem.cost, grad_values,
                                  solution.y_alpha, solution.y_beta, problem.beta,
                                  problem.epsilon, posterior, scores);
  }

  std::map<int, double> out;
  for (int i : pool) {
    out[i] = spec.absolute_value ? std::abs(scores[i]) : scores[i];
  }
  return out;
}

}  // namespace

Vector betweenness_centrality(const SparseMatrix& adjacency) {
  validate_adjacency(adjacency);
  const int n = static_cast<int>(adjacency.rows());

  // adjacency lists, edges unweighted
  std::vector<std::vector<int>> neighbors(n);
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adjacency, k); it; ++it) {
      if (it.value() != 0.0 && it.row() != it.col()) {
        neighbors[it.col()].push_back(static_cast<int>(it.row()));
      }
    }
  }
  for (auto& list : neighbors) std::sort(list.begin(), list.end());

  Vector centrality = Vector::Zero(n);
  std::vector<int> stack_order;
  std::vector<std::vector<int>> predecessors(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<int> distance(n);

  for (int s = 0; s < n; ++s) {
    stack_order.clear();
    for (int v = 0; v < n; ++v) {
      predecessors[v].clear();
      sigma[v] = 0.0;
      delta[v] = 0.0;
      distance[v] = -1;
    }
    sigma[s] = 1.0;
    distance[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      stack_order.push_back(v);
      for (int w : neighbors[v]) {
        if (distance[w] < 0) {
          distance[w] = distance[v] + 1;
          queue.push_back(w);
        }
        if (distance[w] == distance[v] + 1) {
          sigma[w] += sigma[v];
          predecessors[w].push_back(v);
        }
      }
    }
    for (auto it = stack_order.rbegin(); it != stack_order.rend(); ++it) {
      const int w = *it;
      for (int v : predecessors[w]) {
        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) centrality[w] += delta[w];
    }
  }
  return centrality / 2.0;  // each undirected pair counted twice
}

std::map<int, double> score_all(const StrategySpec& spec, const std::vector<int>& pool,
                                const Coupling& coupling, ScoreContext& context) {
  if (pool.empty()) {
    throw Error(ErrorCode::ConfigError, "candidate pool is empty");
  }
  const Matrix& plan = coupling.values;
  std::map<int, double> scores;

  switch (spec.kind) {
    case StrategyKind::Impact:
      return impact_scores(spec, pool, coupling, context);

    case StrategyKind::Random: {
      std::mt19937_64 rng(context.seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int i : pool) scores[i] = unit(rng);
      break;
    }

    case StrategyKind::Entropy:
      for (int i : pool) scores[i] = row_entropy(plan, i);
      break;

    case StrategyKind::Margin: {
      for (int i : pool) {
        double top1 = -std::numeric_limits<double>::infinity();
        double top2 = top1;
        for (int j = 0; j < plan.cols(); ++j) {
          const double t = plan(i, j);
          if (t > top1) {
            top2 = top1;
            top1 = t;
          } else if (t > top2) {
            top2 = t;
          }
        }
        scores[i] = plan.cols() < 2 ? 0.0 : -(top1 - top2);
      }
      break;
    }

    case StrategyKind::LeastConfident:
      for (int i : pool) scores[i] = -plan.row(i).maxCoeff();
      break;

    case StrategyKind::Density: {
      if (spec.density_k < 1) {
        throw Error(ErrorCode::ConfigError, "density k must be >= 1");
      }
      const int n = coupling.n();
      const std::set<int> labeled =
          context.labeled ? *context.labeled : std::set<int>{};
      for (int i : pool) {
        // k nearest neighbors of i among all sources, by plan-row distance
        std::vector<std::pair<double, int>> dist;
        dist.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
          if (j != i) dist.emplace_back(row_sq_distance(plan, i, j), j);
        }
        const int k = std::min<int>(spec.density_k, static_cast<int>(dist.size()));
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::set<int> index_set;
        for (int t = 0; t < k; ++t) index_set.insert(dist[t].second);
        for (int j = 0; j < n; ++j) {
          if (j != i && labeled.count(j) == 0) index_set.insert(j);  // unlabeled set
        }
        double score = 0.0;
        for (int j : index_set) score += row_sq_distance(plan, i, j);
        scores[i] = score;
      }
      break;
    }

    case StrategyKind::Diversity: {
      const std::set<int> labeled =
          context.labeled ? *context.labeled : std::set<int>{};
      for (int i : pool) {
        double score = 0.0;
        for (int j : labeled) score += row_kl(plan, i, j);
        scores[i] = score;
      }
      break;
    }

    case StrategyKind::Betweenness: {
      if (!context.source_adjacency) {
        throw Error(ErrorCode::GraphRequired, "betweenness needs the source graph");
      }
      const Vector centrality = betweenness_centrality(*context.source_adjacency);
      for (int i : pool) scores[i] = centrality[i];
      break;
    }
  }
  return scores;
}

std::vector<int> select_batch(const std::map<int, double>& scores, std::vector<int>& pool,
                              int batch_size, bool* exhausted) {
  if (batch_size < 1) {
    throw Error(ErrorCode::ConfigError, "batch size must be >= 1");
  }
  if (exhausted) *exhausted = false;
  std::vector<int> order = pool;
  for (int i : order) {
    if (scores.find(i) == scores.end()) {
      throw Error(ErrorCode::ConfigError, "pool member has no score");
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = scores.at(a);
    const double sb = scores.at(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  if (static_cast<int>(order.size()) < batch_size) {
    if (exhausted) *exhausted = true;
    batch_size = static_cast<int>(order.size());
  }
  std::vector<int> selected(order.begin(), order.begin() + batch_size);
  for (int i : selected) {
    pool.erase(std::remove(pool.begin(), pool.end(), i), pool.end());
  }
  return selected;
}

}  // namespace otalign::strategies

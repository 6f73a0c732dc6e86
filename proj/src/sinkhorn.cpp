#include "otalign/sinkhorn.hpp"

#include "otalign/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace otalign::sinkhorn {

namespace {

SinkhornConfig checked(const SinkhornConfig& config) {
  if (config.max_iterations < 1) {
    throw Error(ErrorCode::ConfigError, "max_iterations must be >= 1");
  }
  if (!(config.tolerance > 0.0)) {
    throw Error(ErrorCode::ConfigError, "tolerance must be positive");
  }
  return config;
}

std::pair<Coupling, SinkhornReport> solve_log_domain(const AlignmentProblem& problem,
                                                     const Matrix& supervised_cost,
                                                     const SinkhornConfig& config) {
  const int n = problem.n;
  const int m = problem.m;
  const double eps = problem.epsilon;
  const Vector log_mu = problem.marginals.mu.array().log();
  const Vector log_nu = problem.marginals.nu.array().log();

  Vector alpha = Vector::Zero(n);
  Vector beta = Vector::Zero(m);
  Matrix plan(n, m);

  // After the column update the column sums are exact up to round-off, so
  // the row error carries the whole violation; the plan is materialized only
  // when that cheap poll says we are done (or at the iteration cap).
  SinkhornReport report;
  for (int it = 0; it < config.max_iterations; ++it) {
    kernels::sinkhorn_row_update(supervised_cost, beta, eps, log_mu, alpha);
    kernels::sinkhorn_col_update(supervised_cost, alpha, eps, log_nu, beta);
    report.iterations_used = it + 1;
    const double row_err =
        kernels::row_violation(supervised_cost, alpha, beta, eps, problem.marginals.mu);
    if (row_err <= config.tolerance || it + 1 == config.max_iterations) {
      kernels::plan_from_potentials(supervised_cost, alpha, beta, eps, plan);
      report.final_violation =
          kernels::marginal_violation(plan, problem.marginals.mu, problem.marginals.nu);
      if (report.final_violation <= config.tolerance) {
        report.converged = true;
        break;
      }
      if (it + 1 == config.max_iterations) break;
    }
  }

  Coupling coupling;
  coupling.values = std::move(plan);
  coupling.marginal_violation = report.final_violation;
  coupling.alpha = std::move(alpha);
  coupling.beta = std::move(beta);
  return {std::move(coupling), report};
}

std::pair<Coupling, SinkhornReport> solve_plain_domain(const AlignmentProblem& problem,
                                                       const Matrix& supervised_cost,
                                                       const SinkhornConfig& config) {
  const int n = problem.n;
  const int m = problem.m;
  const double eps = problem.epsilon;
  const Matrix kernel = (-supervised_cost.array() / eps).exp();
  // vectorized exp clamps its argument, so extreme cost/eps ratios surface
  // as subnormals rather than zeros; both mean the kernel is unrepresentable
  if (!(kernel.array() >= std::numeric_limits<double>::min()).all()) {
    throw Error(ErrorCode::NumericalOverflow,
                "exp(-cost/epsilon) underflowed the normal range; use log_domain");
  }

  Vector u = Vector::Ones(n);
  Vector v = Vector::Ones(m);
  Matrix plan(n, m);

  SinkhornReport report;
  for (int it = 0; it < config.max_iterations; ++it) {
    u = problem.marginals.mu.array() / (kernel * v).array();
    v = problem.marginals.nu.array() / (kernel.transpose() * u).array();
    if (!u.allFinite() || !v.allFinite()) {
      throw Error(ErrorCode::NumericalOverflow, "scaling vector overflowed; use log_domain");
    }
    plan = u.asDiagonal() * kernel * v.asDiagonal();
    report.iterations_used = it + 1;
    report.final_violation =
        kernels::marginal_violation(plan, problem.marginals.mu, problem.marginals.nu);
    if (report.final_violation <= config.tolerance) {
      report.converged = true;
      break;
    }
  }

  Coupling coupling;
  coupling.values = std::move(plan);
  coupling.marginal_violation = report.final_violation;
  coupling.alpha = eps * u.array().log();
  coupling.beta = eps * v.array().log();
  return {std::move(coupling), report};
}

}  // namespace

Matrix build_supervised_cost(const Matrix& cost, const SupervisionSet& supervision,
                             double beta) {
  if (supervision.n() != cost.rows() || supervision.m() != cost.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "supervision does not match cost dimensions");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::PenaltyOutOfRange, "beta outside [0, 1]");
  }
  Matrix supervised = cost;
  for (const auto& [i, j] : supervision.pairs()) {
    supervised(i, j) *= (1.0 - beta);
  }
  return supervised;
}

std::pair<Coupling, SinkhornReport> solve(const AlignmentProblem& problem,
                                          const SinkhornConfig& config) {
  const SinkhornConfig cfg = checked(config);
  const Matrix supervised_cost =
      build_supervised_cost(problem.cost, problem.supervision, problem.beta);
  return cfg.log_domain ? solve_log_domain(problem, supervised_cost, cfg)
                        : solve_plain_domain(problem, supervised_cost, cfg);
}

Coupling sparsify(Coupling coupling, double threshold_ratio) {
  if (!(threshold_ratio > 0.0 && threshold_ratio < 1.0)) {
    throw Error(ErrorCode::ConfigError, "threshold_ratio must lie in (0, 1)");
  }
  const int n = coupling.n();
  const int m = coupling.m();
  const Matrix& plan = coupling.values;
  const double threshold = threshold_ratio * plan.maxCoeff();

  PlanSupport support;
  support.n = n;
  support.m = m;
  support.row_ptr.assign(n + 1, 0);

  std::vector<int> counts(m, 0);
  for (int i = 0; i < n; ++i) {
    int row_argmax = 0;
    double row_max = plan(i, 0);
    for (int j = 1; j < m; ++j) {
      if (plan(i, j) > row_max) {
        row_max = plan(i, j);
        row_argmax = j;
      }
    }
    for (int j = 0; j < m; ++j) {
      if (plan(i, j) >= threshold || j == row_argmax) {
        support.col_idx.push_back(j);
        support.value.push_back(plan(i, j));
        ++counts[j];
      }
    }
    support.row_ptr[i + 1] = static_cast<int>(support.col_idx.size());
  }

  support.col_ptr.assign(m + 1, 0);
  for (int j = 0; j < m; ++j) support.col_ptr[j + 1] = support.col_ptr[j] + counts[j];
  support.row_idx.resize(support.col_idx.size());
  support.value_by_col.resize(support.col_idx.size());
  support.csc_perm.resize(support.col_idx.size());
  std::vector<int> cursor(support.col_ptr.begin(), support.col_ptr.end() - 1);
  for (int i = 0; i < n; ++i) {
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      const int j = support.col_idx[k];
      support.row_idx[cursor[j]] = i;
      support.value_by_col[cursor[j]] = support.value[k];
      support.csc_perm[cursor[j]] = k;
      ++cursor[j];
    }
  }

  coupling.support = std::move(support);
  return coupling;
}

double entropic_objective(const Matrix& supervised_cost, const Matrix& plan, double epsilon) {
  double transport = 0.0;
  double neg_entropy = 0.0;
  for (int i = 0; i < plan.rows(); ++i) {
    for (int j = 0; j < plan.cols(); ++j) {
      const double t = plan(i, j);
      transport += supervised_cost(i, j) * t;
      if (t > 0.0) neg_entropy += t * (std::log(t) - 1.0);
    }
  }
  return transport + epsilon * neg_entropy;
}

double dual_objective(const Matrix& supervised_cost, const Vector& alpha, const Vector& beta,
                      const Vector& mu, const Vector& nu, double epsilon) {
  double mass = 0.0;
  for (int i = 0; i < supervised_cost.rows(); ++i) {
    for (int j = 0; j < supervised_cost.cols(); ++j) {
      mass += std::exp((alpha[i] + beta[j] - supervised_cost(i, j)) / epsilon);
    }
  }
  return alpha.dot(mu) + beta.dot(nu) - epsilon * mass;
}

}  // namespace otalign::sinkhorn

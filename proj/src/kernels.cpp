#include "otalign/kernels.hpp"

#include <atomic>
#include <cmath>

namespace otalign::kernels {

namespace {

std::atomic<bool> g_parallel{true};

constexpr int kColBlock = 256;

// LSE over a contiguous range: c + log(sum exp(x - c)), c = max.
inline double logsumexp_row(const double* cost_row, const double* offset, double inv_eps,
                            int len) {
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < len; ++j) {
    const double x = (offset[j] - cost_row[j]) * inv_eps;
    if (x > best) best = x;
  }
  double acc = 0.0;
  for (int j = 0; j < len; ++j) {
    acc += std::exp((offset[j] - cost_row[j]) * inv_eps - best);
  }
  return best + std::log(acc);
}

}  // namespace

void use_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

namespace serial {

void sinkhorn_row_update(const Matrix& cost, const Vector& beta, double eps,
                         const Vector& log_mu, Vector& alpha) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inv_eps = 1.0 / eps;
  for (int i = 0; i < n; ++i) {
    alpha[i] = eps * log_mu[i] - eps * logsumexp_row(cost.data() + static_cast<long>(i) * m,
                                                     beta.data(), inv_eps, m);
  }
}

void sinkhorn_col_update(const Matrix& cost, const Vector& alpha, double eps,
                         const Vector& log_nu, Vector& beta) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inv_eps = 1.0 / eps;
  for (int j = 0; j < m; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double x = (alpha[i] - cost(i, j)) * inv_eps;
      if (x > best) best = x;
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += std::exp((alpha[i] - cost(i, j)) * inv_eps - best);
    }
    beta[j] = eps * log_nu[j] - eps * (best + std::log(acc));
  }
}

void plan_from_potentials(const Matrix& cost, const Vector& alpha, const Vector& beta,
                          double eps, Matrix& plan) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inv_eps = 1.0 / eps;
  plan.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      plan(i, j) = std::exp((alpha[i] + beta[j] - cost(i, j)) * inv_eps);
    }
  }
}

double row_violation(const Matrix& cost, const Vector& alpha, const Vector& beta, double eps,
                     const Vector& mu) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inv_eps = 1.0 / eps;
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = cost.data() + static_cast<long>(i) * m;
    const double a = alpha[i];
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::exp((a + beta[j] - row[j]) * inv_eps);
    err += std::abs(s - mu[i]);
  }
  return err;
}

double marginal_violation(const Matrix& plan, const Vector& mu, const Vector& nu) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  double row_err = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += plan(i, j);
    row_err += std::abs(s - mu[i]);
  }
  double col_err = 0.0;
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += plan(i, j);
    col_err += std::abs(s - nu[j]);
  }
  return std::max(row_err, col_err);
}

void support_matvec(const PlanSupport& support, const Vector& mu, const Vector& nu,
                    const Vector& v, Vector& out) {
  const int n = support.n;
  const int m = support.m;
  out.resize(n + m);
  for (int i = 0; i < n; ++i) {
    double s = mu[i] * v[i];
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      s += support.value[k] * v[n + support.col_idx[k]];
    }
    out[i] = s;
  }
  for (int j = 0; j < m; ++j) {
    double s = nu[j] * v[n + j];
    for (int k = support.col_ptr[j]; k < support.col_ptr[j + 1]; ++k) {
      s += support.value_by_col[k] * v[support.row_idx[k]];
    }
    out[n + j] = s;
  }
}

void dense_matvec(const Matrix& plan, const Vector& mu, const Vector& nu, const Vector& v,
                  Vector& out) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  out.resize(n + m);
  for (int i = 0; i < n; ++i) {
    double s = mu[i] * v[i];
    for (int j = 0; j < m; ++j) s += plan(i, j) * v[n + j];
    out[i] = s;
  }
  for (int j = 0; j < m; ++j) {
    double s = nu[j] * v[n + j];
    for (int i = 0; i < n; ++i) s += plan(i, j) * v[i];
    out[n + j] = s;
  }
}

void support_rhs(const PlanSupport& support, const Matrix& grad_f, Vector& rhs) {
  const int n = support.n;
  const int m = support.m;
  rhs.resize(n + m);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      s += support.value[k] * grad_f(i, support.col_idx[k]);
    }
    rhs[i] = s;
  }
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int k = support.col_ptr[j]; k < support.col_ptr[j + 1]; ++k) {
      s += support.value_by_col[k] * grad_f(support.row_idx[k], j);
    }
    rhs[n + j] = s;
  }
}

void dense_rhs(const Matrix& plan, const Matrix& grad_f, Vector& rhs) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  rhs.resize(n + m);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += plan(i, j) * grad_f(i, j);
    rhs[i] = s;
  }
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += plan(i, j) * grad_f(i, j);
    rhs[n + j] = s;
  }
}

void score_impacts(const PlanSupport& support, const Matrix& cost, const Matrix& grad_f,
                   const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                   bool posterior, Vector& scores) {
  const int n = support.n;
  const double factor = -beta / eps;
  scores.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      const int j = support.col_idx[k];
      const double t = support.value[k];
      const double impact = factor * cost(i, j) * t * (y_alpha[i] + y_beta[j] - grad_f(i, j));
      s += posterior ? t * impact : impact;
    }
    scores[i] = s;
  }
}

void score_impacts_dense(const Matrix& plan, const Matrix& cost, const Matrix& grad_f,
                         const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                         bool posterior, Vector& scores) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  const double factor = -beta / eps;
  scores.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double t = plan(i, j);
      const double impact = factor * cost(i, j) * t * (y_alpha[i] + y_beta[j] - grad_f(i, j));
      s += posterior ? t * impact : impact;
    }
    scores[i] = s;
  }
}


void support_rhs_values(const PlanSupport& support, const std::vector<double>& grad_values,
                        Vector& rhs) {
  const int n = support.n;
  const int m = support.m;
  rhs.resize(n + m);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      s += support.value[k] * grad_values[k];
    }
    rhs[i] = s;
  }
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int k = support.col_ptr[j]; k < support.col_ptr[j + 1]; ++k) {
      s += support.value_by_col[k] * grad_values[support.csc_perm[k]];
    }
    rhs[n + j] = s;
  }
}

void score_impacts_values(const PlanSupport& support, const Matrix& cost,
                          const std::vector<double>& grad_values, const Vector& y_alpha,
                          const Vector& y_beta, double beta, double eps, bool posterior,
                          Vector& scores) {
  const int n = support.n;
  const double factor = -beta / eps;
  scores.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      const int j = support.col_idx[k];
      const double t = support.value[k];
      const double impact = factor * cost(i, j) * t * (y_alpha[i] + y_beta[j] - grad_values[k]);
      s += posterior ? t * impact : impact;
    }
    scores[i] = s;
  }
}

}  // namespace serial

namespace parallel {

// The exp-heavy updates lean on vectorized array expressions; they agree
// with the scalar reference to the last few ulps, not bit for bit.
void sinkhorn_row_update(const Matrix& cost, const Vector& beta, double eps,
                         const Vector& log_mu, Vector& alpha) {
  const int n = static_cast<int>(cost.rows());
  const double inv_eps = 1.0 / eps;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const auto z = (beta.transpose().array() - cost.row(i).array()) * inv_eps;
    const double best = z.maxCoeff();
    alpha[i] = eps * log_mu[i] - eps * (best + std::log((z - best).exp().sum()));
  }
}

// Columns go in blocks so every thread streams whole row segments.
void sinkhorn_col_update(const Matrix& cost, const Vector& alpha, double eps,
                         const Vector& log_nu, Vector& beta) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inv_eps = 1.0 / eps;
  const int blocks = (m + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int j0 = b * kColBlock;
    const int width = std::min(m, j0 + kColBlock) - j0;
    auto row_segment = [&](int i) {
      return Eigen::Map<const Eigen::ArrayXd>(cost.data() + static_cast<long>(i) * m + j0,
                                              width);
    };
    Eigen::ArrayXd best =
        Eigen::ArrayXd::Constant(width, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
      best = best.max((alpha[i] - row_segment(i)) * inv_eps);
    }
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(width);
    for (int i = 0; i < n; ++i) {
      acc += ((alpha[i] - row_segment(i)) * inv_eps - best).exp();
    }
    beta.segment(j0, width).array() =
        eps * log_nu.segment(j0, width).array() - eps * (best + acc.log());
  }
}

void plan_from_potentials(const Matrix& cost, const Vector& alpha, const Vector& beta,
                          double eps, Matrix& plan) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inv_eps = 1.0 / eps;
  plan.resize(n, m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    plan.row(i).array() =
        ((alpha[i] + beta.transpose().array() - cost.row(i).array()) * inv_eps).exp();
  }
}

double row_violation(const Matrix& cost, const Vector& alpha, const Vector& beta, double eps,
                     const Vector& mu) {
  const int n = static_cast<int>(cost.rows());
  const double inv_eps = 1.0 / eps;
  Vector row_sums(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    row_sums[i] =
        ((alpha[i] + beta.transpose().array() - cost.row(i).array()) * inv_eps).exp().sum();
  }
  double err = 0.0;
  for (int i = 0; i < n; ++i) err += std::abs(row_sums[i] - mu[i]);
  return err;
}

double marginal_violation(const Matrix& plan, const Vector& mu, const Vector& nu) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  Vector row_sums(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* row = plan.data() + static_cast<long>(i) * m;
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += row[j];
    row_sums[i] = s;
  }
  Vector col_sums = Vector::Zero(m);
  const int blocks = (m + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int j0 = b * kColBlock;
    const int j1 = std::min(m, j0 + kColBlock);
    for (int i = 0; i < n; ++i) {
      const double* row = plan.data() + static_cast<long>(i) * m;
      for (int j = j0; j < j1; ++j) col_sums[j] += row[j];
    }
  }
  double row_err = 0.0;
  for (int i = 0; i < n; ++i) row_err += std::abs(row_sums[i] - mu[i]);
  double col_err = 0.0;
  for (int j = 0; j < m; ++j) col_err += std::abs(col_sums[j] - nu[j]);
  return std::max(row_err, col_err);
}

void support_matvec(const PlanSupport& support, const Vector& mu, const Vector& nu,
                    const Vector& v, Vector& out) {
  const int n = support.n;
  const int m = support.m;
  out.resize(n + m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = mu[i] * v[i];
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      s += support.value[k] * v[n + support.col_idx[k]];
    }
    out[i] = s;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    double s = nu[j] * v[n + j];
    for (int k = support.col_ptr[j]; k < support.col_ptr[j + 1]; ++k) {
      s += support.value_by_col[k] * v[support.row_idx[k]];
    }
    out[n + j] = s;
  }
}

void dense_matvec(const Matrix& plan, const Vector& mu, const Vector& nu, const Vector& v,
                  Vector& out) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  out.resize(n + m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* row = plan.data() + static_cast<long>(i) * m;
    double s = mu[i] * v[i];
    for (int j = 0; j < m; ++j) s += row[j] * v[n + j];
    out[i] = s;
  }
  const int blocks = (m + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int j0 = b * kColBlock;
    const int j1 = std::min(m, j0 + kColBlock);
    for (int j = j0; j < j1; ++j) out[n + j] = nu[j] * v[n + j];
    for (int i = 0; i < n; ++i) {
      const double* row = plan.data() + static_cast<long>(i) * m;
      const double vi = v[i];
      for (int j = j0; j < j1; ++j) out[n + j] += row[j] * vi;
    }
  }
}

void support_rhs(const PlanSupport& support, const Matrix& grad_f, Vector& rhs) {
  const int n = support.n;
  const int m = support.m;
  rhs.resize(n + m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      s += support.value[k] * grad_f(i, support.col_idx[k]);
    }
    rhs[i] = s;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int k = support.col_ptr[j]; k < support.col_ptr[j + 1]; ++k) {
      s += support.value_by_col[k] * grad_f(support.row_idx[k], j);
    }
    rhs[n + j] = s;
  }
}

void dense_rhs(const Matrix& plan, const Matrix& grad_f, Vector& rhs) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  rhs.resize(n + m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += plan(i, j) * grad_f(i, j);
    rhs[i] = s;
  }
  const int blocks = (m + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int j0 = b * kColBlock;
    const int j1 = std::min(m, j0 + kColBlock);
    for (int j = j0; j < j1; ++j) rhs[n + j] = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = j0; j < j1; ++j) rhs[n + j] += plan(i, j) * grad_f(i, j);
    }
  }
}

void score_impacts(const PlanSupport& support, const Matrix& cost, const Matrix& grad_f,
                   const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                   bool posterior, Vector& scores) {
  const int n = support.n;
  const double factor = -beta / eps;
  scores.resize(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      const int j = support.col_idx[k];
      const double t = support.value[k];
      const double impact = factor * cost(i, j) * t * (y_alpha[i] + y_beta[j] - grad_f(i, j));
      s += posterior ? t * impact : impact;
    }
    scores[i] = s;
  }
}

void score_impacts_dense(const Matrix& plan, const Matrix& cost, const Matrix& grad_f,
                         const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                         bool posterior, Vector& scores) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  const double factor = -beta / eps;
  scores.resize(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double t = plan(i, j);
      const double impact = factor * cost(i, j) * t * (y_alpha[i] + y_beta[j] - grad_f(i, j));
      s += posterior ? t * impact : impact;
    }
    scores[i] = s;
  }
}


void support_rhs_values(const PlanSupport& support, const std::vector<double>& grad_values,
                        Vector& rhs) {
  const int n = support.n;
  const int m = support.m;
  rhs.resize(n + m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      s += support.value[k] * grad_values[k];
    }
    rhs[i] = s;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int k = support.col_ptr[j]; k < support.col_ptr[j + 1]; ++k) {
      s += support.value_by_col[k] * grad_values[support.csc_perm[k]];
    }
    rhs[n + j] = s;
  }
}

void score_impacts_values(const PlanSupport& support, const Matrix& cost,
                          const std::vector<double>& grad_values, const Vector& y_alpha,
                          const Vector& y_beta, double beta, double eps, bool posterior,
                          Vector& scores) {
  const int n = support.n;
  const double factor = -beta / eps;
  scores.resize(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      const int j = support.col_idx[k];
      const double t = support.value[k];
      const double impact = factor * cost(i, j) * t * (y_alpha[i] + y_beta[j] - grad_values[k]);
      s += posterior ? t * impact : impact;
    }
    scores[i] = s;
  }
}

}  // namespace parallel

// Tiny instances go serial regardless of the switch: the fork/join overhead
// dwarfs the work and both variants are bit-identical anyway.
constexpr long kParallelCutoff = 1 << 14;

#define OTALIGN_DISPATCH(work, fn, ...)                \
  do {                                                 \
    if (parallel_enabled() && (work) >= kParallelCutoff) { \
      parallel::fn(__VA_ARGS__);                       \
    } else {                                           \
      serial::fn(__VA_ARGS__);                         \
    }                                                  \
  } while (0)

void sinkhorn_row_update(const Matrix& cost, const Vector& beta, double eps,
                         const Vector& log_mu, Vector& alpha) {
  OTALIGN_DISPATCH(cost.size(), sinkhorn_row_update, cost, beta, eps, log_mu, alpha);
}

void sinkhorn_col_update(const Matrix& cost, const Vector& alpha, double eps,
                         const Vector& log_nu, Vector& beta) {
  OTALIGN_DISPATCH(cost.size(), sinkhorn_col_update, cost, alpha, eps, log_nu, beta);
}

void plan_from_potentials(const Matrix& cost, const Vector& alpha, const Vector& beta,
                          double eps, Matrix& plan) {
  OTALIGN_DISPATCH(cost.size(), plan_from_potentials, cost, alpha, beta, eps, plan);
}

double row_violation(const Matrix& cost, const Vector& alpha, const Vector& beta, double eps,
                     const Vector& mu) {
  return parallel_enabled() && cost.size() >= kParallelCutoff
             ? parallel::row_violation(cost, alpha, beta, eps, mu)
             : serial::row_violation(cost, alpha, beta, eps, mu);
}

double marginal_violation(const Matrix& plan, const Vector& mu, const Vector& nu) {
  return parallel_enabled() && plan.size() >= kParallelCutoff
             ? parallel::marginal_violation(plan, mu, nu)
             : serial::marginal_violation(plan, mu, nu);
}

void support_matvec(const PlanSupport& support, const Vector& mu, const Vector& nu,
                    const Vector& v, Vector& out) {
  OTALIGN_DISPATCH(support.nnz(), support_matvec, support, mu, nu, v, out);
}

void dense_matvec(const Matrix& plan, const Vector& mu, const Vector& nu, const Vector& v,
                  Vector& out) {
  OTALIGN_DISPATCH(plan.size(), dense_matvec, plan, mu, nu, v, out);
}

void support_rhs(const PlanSupport& support, const Matrix& grad_f, Vector& rhs) {
  OTALIGN_DISPATCH(support.nnz(), support_rhs, support, grad_f, rhs);
}

void dense_rhs(const Matrix& plan, const Matrix& grad_f, Vector& rhs) {
  OTALIGN_DISPATCH(plan.size(), dense_rhs, plan, grad_f, rhs);
}

void score_impacts(const PlanSupport& support, const Matrix& cost, const Matrix& grad_f,
                   const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                   bool posterior, Vector& scores) {
  OTALIGN_DISPATCH(support.nnz(), score_impacts, support, cost, grad_f, y_alpha, y_beta, beta,
                   eps, posterior, scores);
}

void score_impacts_dense(const Matrix& plan, const Matrix& cost, const Matrix& grad_f,
                         const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                         bool posterior, Vector& scores) {
  OTALIGN_DISPATCH(plan.size(), score_impacts_dense, plan, cost, grad_f, y_alpha, y_beta, beta,
                   eps, posterior, scores);
}


void support_rhs_values(const PlanSupport& support, const std::vector<double>& grad_values,
                        Vector& rhs) {
  OTALIGN_DISPATCH(support.nnz(), support_rhs_values, support, grad_values, rhs);
}

void score_impacts_values(const PlanSupport& support, const Matrix& cost,
                          const std::vector<double>& grad_values, const Vector& y_alpha,
                          const Vector& y_beta, double beta, double eps, bool posterior,
                          Vector& scores) {
  OTALIGN_DISPATCH(support.nnz(), score_impacts_values, support, cost, grad_values, y_alpha,
                   y_beta, beta, eps, posterior, scores);
}

#undef OTALIGN_DISPATCH

}  // namespace otalign::kernels

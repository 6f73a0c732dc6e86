#include "otalign/adjoint.hpp"

#include "otalign/kernels.hpp"

#include <cmath>

namespace otalign::adjoint {

namespace {

void check_dims(const Coupling& coupling, const Marginals& marginals, const Matrix& grad_f) {
  if (marginals.mu.size() != coupling.n() || marginals.nu.size() != coupling.m()) {
    throw Error(ErrorCode::DimensionMismatch, "marginals do not match coupling");
  }
  if (grad_f.rows() != coupling.n() || grad_f.cols() != coupling.m()) {
    throw Error(ErrorCode::DimensionMismatch, "grad_f does not match coupling");
  }
  if (!grad_f.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "grad_f contains NaN or infinity");
  }
}

}  // namespace

AdjointSystem AdjointSystem::from_support(const Coupling& coupling, const Marginals& marginals,
                                          const Matrix& grad_f) {
  check_dims(coupling, marginals, grad_f);
  if (coupling.support.empty() && coupling.n() > 0) {
    throw Error(ErrorCode::ConfigError, "coupling has no support; call sparsify first");
  }
  AdjointSystem system;
  system.n_ = coupling.n();
  system.m_ = coupling.m();
  system.dense_ = false;
  system.support_ = coupling.support;
  system.mu_ = marginals.mu;
  system.nu_ = marginals.nu;
  kernels::support_rhs(system.support_, grad_f, system.rhs_);
  return system;
}

AdjointSystem AdjointSystem::from_support_values(const Coupling& coupling,
                                                 const Marginals& marginals,
                                                 const std::vector<double>& grad_values) {
  if (marginals.mu.size() != coupling.n() || marginals.nu.size() != coupling.m()) {
    throw Error(ErrorCode::DimensionMismatch, "marginals do not match coupling");
  }
  if (coupling.support.empty() && coupling.n() > 0) {
    throw Error(ErrorCode::ConfigError, "coupling has no support; call sparsify first");
  }
  if (grad_values.size() != coupling.support.value.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gradient values do not match the support");
  }
  AdjointSystem system;
  system.n_ = coupling.n();
  system.m_ = coupling.m();
  system.dense_ = false;
  system.support_ = coupling.support;
  system.mu_ = marginals.mu;
  system.nu_ = marginals.nu;
  kernels::support_rhs_values(system.support_, grad_values, system.rhs_);
  return system;
}

AdjointSystem AdjointSystem::dense(const Coupling& coupling, const Marginals& marginals,
                                   const Matrix& grad_f) {
  check_dims(coupling, marginals, grad_f);
  AdjointSystem system;
  system.n_ = coupling.n();
  system.m_ = coupling.m();
  system.dense_ = true;
  system.plan_ = coupling.values;
  system.mu_ = marginals.mu;
  system.nu_ = marginals.nu;
  kernels::dense_rhs(system.plan_, grad_f, system.rhs_);
  return system;
}

Vector AdjointSystem::matvec(const Vector& v) const {
  if (v.size() != n_ + m_) {
    throw Error(ErrorCode::DimensionMismatch, "matvec argument has wrong length");
  }
  Vector out;
  if (dense_) {
    kernels::dense_matvec(plan_, mu_, nu_, v, out);
  } else {
    kernels::support_matvec(support_, mu_, nu_, v, out);
  }
  return out;
}

Matrix AdjointSystem::to_dense_matrix() const {
  Matrix a = Matrix::Zero(n_ + m_, n_ + m_);
  for (int i = 0; i < n_; ++i) a(i, i) = mu_[i];
  for (int j = 0; j < m_; ++j) a(n_ + j, n_ + j) = nu_[j];
  if (dense_) {
    a.block(0, n_, n_, m_) = plan_;
    a.block(n_, 0, m_, n_) = plan_.transpose();
  } else {
    for (int i = 0; i < n_; ++i) {
      for (int k = support_.row_ptr[i]; k < support_.row_ptr[i + 1]; ++k) {
        const int j = support_.col_idx[k];
        a(i, n_ + j) = support_.value[k];
        a(n_ + j, i) = support_.value[k];
      }
    }
  }
  return a;
}

AdjointSystem assemble(const Coupling& coupling, const Marginals& marginals,
                       const Matrix& grad_f) {
  return AdjointSystem::from_support(coupling, marginals, grad_f);
}

AdjointSolution cg_solve(const AdjointSystem& system, const CgConfig& config) {
  const int n = system.n();
  const int m = system.m();
  const int size = n + m;
  const int max_iterations =
      config.max_iterations > 0 ? config.max_iterations : 10 * size;

  AdjointSolution solution;
  const Vector& b = system.rhs();
  const double b_norm = b.norm();

  Vector y = Vector::Zero(size);
  if (b_norm == 0.0) {
    solution.y_alpha = y.head(n);
    solution.y_beta = y.tail(m);
    solution.converged = true;
    return solution;
  }

  Vector r = b;  // r = b - A*0
  Vector p = r;
  double rs = r.squaredNorm();
  double rel_residual = std::sqrt(rs) / b_norm;

  int it = 0;
  while (it < max_iterations && rel_residual > config.tolerance) {
    const Vector ap = system.matvec(p);
    const double p_ap = p.dot(ap);
    if (p_ap <= 0.0) break;  // numerically exhausted search direction
    const double step = rs / p_ap;
    y += step * p;
    r -= step * ap;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
    rel_residual = std::sqrt(rs) / b_norm;
    ++it;
    if (config.iterate_log) config.iterate_log->push_back(y);
  }

  // Report the true residual, not the recurrence one, so the convergence
  // flag is trustworthy even after many iterations.
  rel_residual = (b - system.matvec(y)).norm() / b_norm;

  solution.y_alpha = y.head(n);
  solution.y_beta = y.tail(m);
  solution.iterations = it;
  solution.final_relative_residual = rel_residual;
  solution.converged = rel_residual <= config.tolerance;
  return solution;
}

Matrix grad_cost(const Coupling& coupling, const AdjointSolution& solution,
                 const Matrix& grad_f, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::RegularizationOutOfRange, "epsilon must be positive");
  }
  const int n = coupling.n();
  const int m = coupling.m();
  if (grad_f.rows() != n || grad_f.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "grad_f does not match coupling");
  }
  Matrix out = Matrix::Zero(n, m);
  const PlanSupport& support = coupling.support;
  if (support.empty()) {
    throw Error(ErrorCode::ConfigError, "coupling has no support; call sparsify first");
  }
  for (int i = 0; i < n; ++i) {
    for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
      const int j = support.col_idx[k];
      out(i, j) = support.value[k] *
                  (solution.y_alpha[i] + solution.y_beta[j] - grad_f(i, j)) / epsilon;
    }
  }
  return out;
}

double pairwise_impact(int i, int j, const AlignmentProblem& problem, const Coupling& coupling,
                       const AdjointSolution& solution, const Matrix& grad_f) {
  if (i < 0 || i >= coupling.n() || j < 0 || j >= coupling.m()) {
    throw Error(ErrorCode::IndexOutOfRange, "pairwise impact index outside plan");
  }
  return -(problem.beta / problem.epsilon) * problem.cost(i, j) * coupling.values(i, j) *
         (solution.y_alpha[i] + solution.y_beta[j] - grad_f(i, j));
}

namespace {

double row_impact_sum(int i, const AlignmentProblem& problem, const Coupling& coupling,
                      const AdjointSolution& solution, const Matrix& grad_f, bool posterior) {
  if (i < 0 || i >= coupling.n()) {
    throw Error(ErrorCode::IndexOutOfRange, "row index outside plan");
  }
  const PlanSupport& support = coupling.support;
  if (support.empty()) {
    throw Error(ErrorCode::ConfigError, "coupling has no support; call sparsify first");
  }
  const double factor = -problem.beta / problem.epsilon;
  double sum = 0.0;
  for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
    const int j = support.col_idx[k];
    const double t = support.value[k];
    const double impact =
        factor * problem.cost(i, j) * t * (solution.y_alpha[i] + solution.y_beta[j] - grad_f(i, j));
    sum += posterior ? t * impact : impact;
  }
  return sum;
}

}  // namespace

double posterior_impact(int i, const AlignmentProblem& problem, const Coupling& coupling,
                        const AdjointSolution& solution, const Matrix& grad_f) {
  return row_impact_sum(i, problem, coupling, solution, grad_f, /*posterior=*/true);
}

double uniform_impact(int i, const AlignmentProblem& problem, const Coupling& coupling,
                      const AdjointSolution& solution, const Matrix& grad_f) {
  return row_impact_sum(i, problem, coupling, solution, grad_f, /*posterior=*/false);
}

}  // namespace otalign::adjoint

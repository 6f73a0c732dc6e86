#pragma once

#include "otalign/types.hpp"

#include <utility>

namespace otalign::sinkhorn {

struct SinkhornConfig {
  int max_iterations = 10000;
  double tolerance = 1e-9;  // L1 marginal violation
  bool log_domain = true;
};

struct SinkhornReport {
  int iterations_used = 0;
  double final_violation = 0.0;
  bool converged = false;
};

// C~[i,j] = (1 - beta * H[i,j]) * C[i,j]. Entries of supervised pairs are
// scaled by (1 - beta); everything else is untouched.
Matrix build_supervised_cost(const Matrix& cost, const SupervisionSet& supervision, double beta);

// Solve the entropy-regularized problem
//   min_{T in Pi(mu,nu)} <C~, T> - eps * Ent(T),  Ent(T) = -sum T (log T - 1)
// for the problem's supervised cost. Non-convergence is reported, not thrown;
// plain-domain overflow throws Error(NumericalOverflow).
std::pair<Coupling, SinkhornReport> solve(const AlignmentProblem& problem,
                                          const SinkhornConfig& config);

// Populate coupling.support with every entry >= threshold_ratio * max(T)
// plus each row's argmax; dense values are untouched.
Coupling sparsify(Coupling coupling, double threshold_ratio);

// <C~, T> - eps * Ent(T). Not monotone along Sinkhorn iterates; kept for
// reporting and tests.
double entropic_objective(const Matrix& supervised_cost, const Matrix& plan, double epsilon);

// alpha'mu + beta'nu - eps * sum exp((alpha_i + beta_j - C~[i,j]) / eps).
// Each Sinkhorn half-step maximizes this exactly in one block, so it is
// non-decreasing across iterations.
double dual_objective(const Matrix& supervised_cost, const Vector& alpha, const Vector& beta,
                      const Vector& mu, const Vector& nu, double epsilon);

}  // namespace otalign::sinkhorn

#pragma once

#include "otalign/types.hpp"

namespace otalign::adjoint {

// The (n+m) x (n+m) system
//   [ diag(mu)  T        ] [y_alpha]   [ (T .* grad_f) 1_m  ]
//   [ T'        diag(nu) ] [y_beta ] = [ (T .* grad_f)' 1_n ]
// kept implicit as a matvec over the plan (support or dense view). The
// operator is symmetric PSD with null space span{[1_n; -1_m]} when T meets
// the marginals, and the rhs is orthogonal to that null vector by
// construction, so CG applies despite the singularity.
class AdjointSystem {
 public:
  // Sparse path: visits only coupling.support (must be populated).
  static AdjointSystem from_support(const Coupling& coupling, const Marginals& marginals,
                                    const Matrix& grad_f);
  // Sparse path fed by gradient values aligned with the support (row order),
  // so nothing of size n*m is ever formed.
  static AdjointSystem from_support_values(const Coupling& coupling, const Marginals& marginals,
                                           const std::vector<double>& grad_values);
  // Dense path: visits every entry of the plan. Reference/ablation route.
  static AdjointSystem dense(const Coupling& coupling, const Marginals& marginals,
                             const Matrix& grad_f);

  Vector matvec(const Vector& v) const;
  const Vector& rhs() const { return rhs_; }
  int n() const { return n_; }
  int m() const { return m_; }
  bool is_dense() const { return dense_; }

  // Dense materialization of the operator, for small-instance tests.
  Matrix to_dense_matrix() const;

 private:
  AdjointSystem() = default;

  int n_ = 0;
  int m_ = 0;
  bool dense_ = false;
  PlanSupport support_;
  Matrix plan_;  // dense path only
  Vector mu_;
  Vector nu_;
  Vector rhs_;
};

AdjointSystem assemble(const Coupling& coupling, const Marginals& marginals,
                       const Matrix& grad_f);

struct AdjointSolution {
  Vector y_alpha;
  Vector y_beta;
  int iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
};

struct CgConfig {
  double tolerance = 1e-8;  // relative residual ||Ay - b|| / ||b||
  int max_iterations = 0;   // 0 means 10 * (n + m)
  // Filled with one entry per iteration when set; used by convergence tests.
  std::vector<Vector>* iterate_log = nullptr;
};

// Conjugate gradient from a zero initial guess. Since b lies in range(A) the
// Krylov space stays inside range(A) and the limit is the minimum-norm
// (pseudoinverse) solution. b = 0 returns y = 0 without iterating.
AdjointSolution cg_solve(const AdjointSystem& system, const CgConfig& config = {});

// Eq.-style closed forms downstream of the adjoint solve. grad_cost is
//   (1/eps) T .* (y_alpha 1' + 1 y_beta' - grad_f)
// evaluated over the coupling's support (zero elsewhere).
Matrix grad_cost(const Coupling& coupling, const AdjointSolution& solution,
                 const Matrix& grad_f, double epsilon);

// -(beta/eps) C[i,j] T[i,j] (y_alpha[i] + y_beta[j] - grad_f[i,j])
double pairwise_impact(int i, int j, const AlignmentProblem& problem, const Coupling& coupling,
                       const AdjointSolution& solution, const Matrix& grad_f);

// sum_j T[i,j] * impact(i,j) over the support of row i.
double posterior_impact(int i, const AlignmentProblem& problem, const Coupling& coupling,
                        const AdjointSolution& solution, const Matrix& grad_f);

// Ablation variant: unweighted sum over the support of row i.
double uniform_impact(int i, const AlignmentProblem& problem, const Coupling& coupling,
                      const AdjointSolution& solution, const Matrix& grad_f);

}  // namespace otalign::adjoint

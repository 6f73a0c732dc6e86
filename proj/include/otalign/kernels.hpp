#pragma once

#include "otalign/types.hpp"

#include <vector>

namespace otalign::kernels {

// Process-wide switch between the OpenMP kernels and the serial reference
// ones. Both variants produce bit-identical results: parallelism is only
// ever across independent rows, columns or candidates, and the inner
// summation order is the same.
void use_parallel(bool enabled);
bool parallel_enabled();

// Log-domain Sinkhorn updates for T[i,j] = exp((alpha[i]+beta[j]-C[i,j])/eps):
//   alpha[i] = eps*log_mu[i] - eps * LSE_j((beta[j] - C[i,j]) / eps)
//   beta[j]  = eps*log_nu[j] - eps * LSE_i((alpha[i] - C[i,j]) / eps)
void sinkhorn_row_update(const Matrix& cost, const Vector& beta, double eps,
                         const Vector& log_mu, Vector& alpha);
void sinkhorn_col_update(const Matrix& cost, const Vector& alpha, double eps,
                         const Vector& log_nu, Vector& beta);

void plan_from_potentials(const Matrix& cost, const Vector& alpha, const Vector& beta,
                          double eps, Matrix& plan);

// ||T1 - mu||_1 for the plan implied by the potentials, without
// materializing it. After a column update this carries the whole marginal
// error, so the solver can poll it cheaply.
double row_violation(const Matrix& cost, const Vector& alpha, const Vector& beta, double eps,
                     const Vector& mu);

// max of the two L1 constraint errors ||T1 - mu||_1 and ||T'1 - nu||_1.
double marginal_violation(const Matrix& plan, const Vector& mu, const Vector& nu);

// y = [diag(mu) v_a + T v_b ; T' v_a + diag(nu) v_b] over the plan support.
void support_matvec(const PlanSupport& support, const Vector& mu, const Vector& nu,
                    const Vector& v, Vector& out);

// Same operator against the dense plan (reference / ablation path).
void dense_matvec(const Matrix& plan, const Vector& mu, const Vector& nu, const Vector& v,
                  Vector& out);

// b = [(T.*G)1_m ; (T.*G)'1_n] restricted to the support, G = grad_f.
void support_rhs(const PlanSupport& support, const Matrix& grad_f, Vector& rhs);
void dense_rhs(const Matrix& plan, const Matrix& grad_f, Vector& rhs);

// Per-source aggregation of pairwise query impacts
//   I[i,j] = -(beta/eps) * C[i,j] * T[i,j] * (y_a[i] + y_b[j] - grad_f[i,j])
// summed over the support row (posterior=true weights by T[i,j]).
void score_impacts(const PlanSupport& support, const Matrix& cost, const Matrix& grad_f,
                   const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                   bool posterior, Vector& scores);
void score_impacts_dense(const Matrix& plan, const Matrix& cost, const Matrix& grad_f,
                         const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                         bool posterior, Vector& scores);


// Variants that read grad_f from an array aligned with the support's
// row-order values, so scoring rounds stay O(nnz).
void support_rhs_values(const PlanSupport& support, const std::vector<double>& grad_values,
                        Vector& rhs);
void score_impacts_values(const PlanSupport& support, const Matrix& cost,
                          const std::vector<double>& grad_values, const Vector& y_alpha,
                          const Vector& y_beta, double beta, double eps, bool posterior,
                          Vector& scores);

namespace serial {
void sinkhorn_row_update(const Matrix& cost, const Vector& beta, double eps,
                         const Vector& log_mu, Vector& alpha);
void sinkhorn_col_update(const Matrix& cost, const Vector& alpha, double eps,
                         const Vector& log_nu, Vector& beta);
void plan_from_potentials(const Matrix& cost, const Vector& alpha, const Vector& beta,
                          double eps, Matrix& plan);
double row_violation(const Matrix& cost, const Vector& alpha, const Vector& beta, double eps,
                     const Vector& mu);
double marginal_violation(const Matrix& plan, const Vector& mu, const Vector& nu);
void support_matvec(const PlanSupport& support, const Vector& mu, const Vector& nu,
                    const Vector& v, Vector& out);
void dense_matvec(const Matrix& plan, const Vector& mu, const Vector& nu, const Vector& v,
                  Vector& out);
void support_rhs(const PlanSupport& support, const Matrix& grad_f, Vector& rhs);
void dense_rhs(const Matrix& plan, const Matrix& grad_f, Vector& rhs);
void score_impacts(const PlanSupport& support, const Matrix& cost, const Matrix& grad_f,
                   const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                   bool posterior, Vector& scores);
void score_impacts_dense(const Matrix& plan, const Matrix& cost, const Matrix& grad_f,
                         const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                         bool posterior, Vector& scores);
void support_rhs_values(const PlanSupport& support, const std::vector<double>& grad_values,
                        Vector& rhs);
void score_impacts_values(const PlanSupport& support, const Matrix& cost,
                          const std::vector<double>& grad_values, const Vector& y_alpha,
                          const Vector& y_beta, double beta, double eps, bool posterior,
                          Vector& scores);
}  // namespace serial

namespace parallel {
void sinkhorn_row_update(const Matrix& cost, const Vector& beta, double eps,
                         const Vector& log_mu, Vector& alpha);
void sinkhorn_col_update(const Matrix& cost, const Vector& alpha, double eps,
                         const Vector& log_nu, Vector& beta);
void plan_from_potentials(const Matrix& cost, const Vector& alpha, const Vector& beta,
                          double eps, Matrix& plan);
double row_violation(const Matrix& cost, const Vector& alpha, const Vector& beta, double eps,
                     const Vector& mu);
double marginal_violation(const Matrix& plan, const Vector& mu, const Vector& nu);
void support_matvec(const PlanSupport& support, const Vector& mu, const Vector& nu,
                    const Vector& v, Vector& out);
void dense_matvec(const Matrix& plan, const Vector& mu, const Vector& nu, const Vector& v,
                  Vector& out);
void support_rhs(const PlanSupport& support, const Matrix& grad_f, Vector& rhs);
void dense_rhs(const Matrix& plan, const Matrix& grad_f, Vector& rhs);
void score_impacts(const PlanSupport& support, const Matrix& cost, const Matrix& grad_f,
                   const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                   bool posterior, Vector& scores);
void score_impacts_dense(const Matrix& plan, const Matrix& cost, const Matrix& grad_f,
                         const Vector& y_alpha, const Vector& y_beta, double beta, double eps,
                         bool posterior, Vector& scores);
void support_rhs_values(const PlanSupport& support, const std::vector<double>& grad_values,
                        Vector& rhs);
void score_impacts_values(const PlanSupport& support, const Matrix& cost,
                          const std::vector<double>& grad_values, const Vector& y_alpha,
                          const Vector& y_beta, double beta, double eps, bool posterior,
                          Vector& scores);
}  // namespace parallel

}  // namespace otalign::kernels

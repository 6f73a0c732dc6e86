#pragma once

#include "otalign/sinkhorn.hpp"
#include "otalign/types.hpp"
#include "otalign/utility.hpp"

#include <string>
#include <vector>

namespace otalign::gradcheck {

// Gradient of f(T(C~)) w.r.t. the supervised cost through the adjoint path:
// solve, keep the full support, solve the adjoint system by CG, apply the
// closed form. cg_tolerance tightens with the check; sinkhorn config should
// use a tolerance well below the finite-difference step.
Matrix adjoint_grad_cost(const AlignmentProblem& problem, const utility::UtilitySpec& spec,
                         const sinkhorn::SinkhornConfig& config, double cg_tolerance = 1e-12);

// Central finite differences of f(T(C~ + delta E_ij)) over every entry,
// re-solving from scratch both sides. The independent check of the closed
// form above: the two share only the forward solver.
Matrix finite_difference_grad_cost(const AlignmentProblem& problem,
                                   const utility::UtilitySpec& spec, double delta,
                                   const sinkhorn::SinkhornConfig& config);

// Forward difference (f(T(H_ij = delta)) - f(T(H))) / delta for one entry.
double finite_difference_impact(int i, int j, const AlignmentProblem& problem,
                                const utility::UtilitySpec& spec, double delta,
                                const sinkhorn::SinkhornConfig& config);

// max_ij |a - b| / max_ij |b|
double max_normalized_error(const Matrix& candidate, const Matrix& reference);

struct UtilityCheck {
  std::string utility;
  double max_error = 0.0;
};

struct GradcheckReport {
  std::vector<UtilityCheck> checks;
  double worst_error = 0.0;
  bool passed = false;  // worst_error <= threshold
};

// Adjoint-vs-finite-difference comparison for each utility, on instances
// capped at n*m <= 10000.
GradcheckReport run(const AlignmentProblem& problem,
                    const std::vector<utility::UtilitySpec>& utilities,
                    const std::vector<std::string>& names, double delta, double threshold,
                    const sinkhorn::SinkhornConfig& config);

}  // namespace otalign::gradcheck

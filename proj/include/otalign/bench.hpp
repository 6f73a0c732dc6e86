#pragma once

#include "otalign/strategies.hpp"
#include "otalign/types.hpp"

#include <vector>

namespace otalign::bench {

struct ScoringTiming {
  double seconds = 0.0;  // median over repeats
  int cg_iterations = 0;
};

// Wall-clock of one full scoring round (utility gradient, adjoint assembly,
// CG solve, per-candidate aggregation) under the given strategy.
ScoringTiming time_scoring_round(const strategies::StrategySpec& spec,
                                 const AlignmentProblem& problem, const Coupling& coupling,
                                 bool dense_adjoint, int repeats, double cg_tolerance = 1e-8);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace otalign::bench

#include "otalign/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>

namespace otalign::bench {

ScoringTiming time_scoring_round(const strategies::StrategySpec& spec,
                                 const AlignmentProblem& problem, const Coupling& coupling,
                                 bool dense_adjoint, int repeats, double cg_tolerance) {
  using Clock = std::chrono::steady_clock;
  repeats = std::max(1, repeats);

  std::vector<int> pool(problem.n);
  std::iota(pool.begin(), pool.end(), 0);
  const std::set<int> labeled;

  ScoringTiming timing;
  std::vector<double> samples;
  samples.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    strategies::ScoreContext context;
    context.problem = &problem;
    context.labeled = &labeled;
    context.cg_tolerance = cg_tolerance;
    context.dense_adjoint = dense_adjoint;
    const auto start = Clock::now();
    const auto scores = strategies::score_all(spec, pool, coupling, context);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    samples.push_back(seconds);
    timing.cg_iterations = context.cg_iterations;
    (void)scores;
  }
  std::sort(samples.begin(), samples.end());
  timing.seconds = samples[samples.size() / 2];
  return timing;
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::ConfigError, "linear fit needs at least two samples");
  }
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mean_x) * (x[i] - mean_x);
    sxy += (x[i] - mean_x) * (y[i] - mean_y);
    syy += (y[i] - mean_y) * (y[i] - mean_y);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double predicted = fit.intercept + fit.slope * x[i];
    ss_res += (y[i] - predicted) * (y[i] - predicted);
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

}  // namespace otalign::bench

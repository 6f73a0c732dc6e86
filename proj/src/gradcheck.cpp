#include "otalign/gradcheck.hpp"

#include "otalign/adjoint.hpp"

#include <cmath>

namespace otalign::gradcheck {

namespace {

// Tiny ratio so the support keeps every representable entry; per-row argmax
// fills in anything that underflowed.
constexpr double kFullSupportRatio = 1e-300;

double utility_of_resolved_cost(const Matrix& effective_cost, const AlignmentProblem& problem,
                                const utility::UtilitySpec& spec,
                                const sinkhorn::SinkhornConfig& config) {
  AlignmentProblem perturbed = problem;
  perturbed.cost = effective_cost;
  perturbed.beta = 0.0;  // cost already carries any supervision scaling
  perturbed.supervision = SupervisionSet(problem.n, problem.m);
  auto [coupling, report] = sinkhorn::solve(perturbed, config);
  return utility::value(spec, coupling);
}

}  // namespace

Matrix adjoint_grad_cost(const AlignmentProblem& problem, const utility::UtilitySpec& spec,
                         const sinkhorn::SinkhornConfig& config, double cg_tolerance) {
  auto [coupling, report] = sinkhorn::solve(problem, config);
  coupling = sinkhorn::sparsify(std::move(coupling), kFullSupportRatio);
  const Matrix grad_f = utility::gradient(spec, coupling);
  const adjoint::AdjointSystem system =
      adjoint::AdjointSystem::from_support(coupling, problem.marginals, grad_f);
  adjoint::CgConfig cg;
  cg.tolerance = cg_tolerance;
  const adjoint::AdjointSolution solution = adjoint::cg_solve(system, cg);
  return adjoint::grad_cost(coupling, solution, grad_f, problem.epsilon);
}

Matrix finite_difference_grad_cost(const AlignmentProblem& problem,
                                   const utility::UtilitySpec& spec, double delta,
                                   const sinkhorn::SinkhornConfig& config) {
  const Matrix supervised =
      sinkhorn::build_supervised_cost(problem.cost, problem.supervision, problem.beta);
  Matrix grad(problem.n, problem.m);
  Matrix perturbed = supervised;
  for (int i = 0; i < problem.n; ++i) {
    for (int j = 0; j < problem.m; ++j) {
      perturbed(i, j) = supervised(i, j) + delta;
      const double f_plus = utility_of_resolved_cost(perturbed, problem, spec, config);
      perturbed(i, j) = supervised(i, j) - delta;
      const double f_minus = utility_of_resolved_cost(perturbed, problem, spec, config);
      perturbed(i, j) = supervised(i, j);
      grad(i, j) = (f_plus - f_minus) / (2.0 * delta);
    }
  }
  return grad;
}

double finite_difference_impact(int i, int j, const AlignmentProblem& problem,
                                const utility::UtilitySpec& spec, double delta,
                                const sinkhorn::SinkhornConfig& config) {
  const Matrix supervised =
      sinkhorn::build_supervised_cost(problem.cost, problem.supervision, problem.beta);
  const double f_base = utility_of_resolved_cost(supervised, problem, spec, config);

  // H_ij += delta scales the supervised entry by (1 - beta*(H_ij + delta))
  Matrix perturbed = supervised;
  perturbed(i, j) -= delta * problem.beta * problem.cost(i, j);
  const double f_plus = utility_of_resolved_cost(perturbed, problem, spec, config);
  return (f_plus - f_base) / delta;
}

double max_normalized_error(const Matrix& candidate, const Matrix& reference) {
  const double scale = reference.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    return candidate.cwiseAbs().maxCoeff() == 0.0 ? 0.0
                                                  : std::numeric_limits<double>::infinity();
  }
  return (candidate - reference).cwiseAbs().maxCoeff() / scale;
}

GradcheckReport run(const AlignmentProblem& problem,
                    const std::vector<utility::UtilitySpec>& utilities,
                    const std::vector<std::string>& names, double delta, double threshold,
                    const sinkhorn::SinkhornConfig& config) {
  if (static_cast<long long>(problem.n) * problem.m > 10000) {
    throw Error(ErrorCode::InstanceTooLarge,
                "finite differences are capped at n*m <= 10000 entries");
  }
  if (utilities.size() != names.size()) {
    throw Error(ErrorCode::ConfigError, "one name per utility required");
  }
  GradcheckReport report;
  for (std::size_t u = 0; u < utilities.size(); ++u) {
    const Matrix adjoint_grad = adjoint_grad_cost(problem, utilities[u], config);
    const Matrix fd_grad = finite_difference_grad_cost(problem, utilities[u], delta, config);
    UtilityCheck check;
    check.utility = names[u];
    check.max_error = max_normalized_error(adjoint_grad, fd_grad);
    report.worst_error = std::max(report.worst_error, check.max_error);
    report.checks.push_back(std::move(check));
  }
  report.passed = report.worst_error <= threshold;
  return report;
}

}  // namespace otalign::gradcheck

#include "otalign/types.hpp"

#include <cmath>
#include <sstream>

namespace otalign {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NonPositiveMass: return "non-positive mass";
    case ErrorCode::MassImbalance: return "mass imbalance";
    case ErrorCode::NegativeCost: return "negative cost";
    case ErrorCode::NonFiniteValue: return "non-finite value";
    case ErrorCode::PenaltyOutOfRange: return "penalizing factor out of range";
    case ErrorCode::RegularizationOutOfRange: return "regularization weight out of range";
    case ErrorCode::DuplicateSourcePair: return "duplicate source pair";
    case ErrorCode::IndexOutOfRange: return "index out of range";
    case ErrorCode::AsymmetricAdjacency: return "asymmetric adjacency";
    case ErrorCode::MissingLaplacians: return "missing Laplacians";
    case ErrorCode::UnexpectedLaplacians: return "unexpected Laplacians";
    case ErrorCode::NumericalOverflow: return "numerical overflow";
    case ErrorCode::GraphRequired: return "graph required";
    case ErrorCode::ZeroNormFeature: return "zero-norm feature";
    case ErrorCode::ParseError: return "parse error";
    case ErrorCode::EmptyEvaluationSet: return "empty evaluation set";
    case ErrorCode::InstanceTooLarge: return "instance too large";
    case ErrorCode::InfeasibleParameters: return "infeasible parameters";
    case ErrorCode::ConfigError: return "config error";
    case ErrorCode::OracleFailure: return "oracle failure";
  }
  return "unknown error";
}

Marginals Marginals::uniform(int n, int m) {
  Marginals out;
  out.mu = Vector::Constant(n, 1.0 / n);
  out.nu = Vector::Constant(m, 1.0 / m);
  return out;
}

void SupervisionSet::add(int source, int target) {
  if (source < 0 || source >= n_ || target < 0 || target >= m_) {
    std::ostringstream oss;
    oss << "supervision pair (" << source << ", " << target << ") outside " << n_ << "x" << m_;
    throw Error(ErrorCode::IndexOutOfRange, oss.str());
  }
  auto [it, inserted] = pairs_.emplace(source, target);
  if (!inserted && it->second != target) {
    std::ostringstream oss;
    oss << "source " << source << " already aligned to " << it->second;
    throw Error(ErrorCode::DuplicateSourcePair, oss.str());
  }
}

int SupervisionSet::target_of(int source) const {
  auto it = pairs_.find(source);
  return it == pairs_.end() ? -1 : it->second;
}

Matrix SupervisionSet::to_dense() const {
  Matrix h = Matrix::Zero(n_, m_);
  for (const auto& [i, j] : pairs_) h(i, j) = 1.0;
  return h;
}

double PlanSupport::retained_mass() const {
  double total = 0.0;
  for (double v : value) total += v;
  return total;
}

const AlignmentProblem& validate_problem(const AlignmentProblem& p) {
  if (p.n <= 0 || p.m <= 0) {
    throw Error(ErrorCode::DimensionMismatch, "n and m must be positive");
  }
  if (p.marginals.mu.size() != p.n || p.marginals.nu.size() != p.m) {
    std::ostringstream oss;
    oss << "marginals sized " << p.marginals.mu.size() << "/" << p.marginals.nu.size()
        << " for problem " << p.n << "x" << p.m;
    throw Error(ErrorCode::DimensionMismatch, oss.str());
  }
  if (p.cost.rows() != p.n || p.cost.cols() != p.m) {
    std::ostringstream oss;
    oss << "cost is " << p.cost.rows() << "x" << p.cost.cols() << ", expected " << p.n << "x"
        << p.m;
    throw Error(ErrorCode::DimensionMismatch, oss.str());
  }
  if (p.supervision.n() != p.n || p.supervision.m() != p.m) {
    throw Error(ErrorCode::DimensionMismatch, "supervision dimensions do not match problem");
  }
  if ((p.marginals.mu.array() <= 0.0).any() || (p.marginals.nu.array() <= 0.0).any()) {
    throw Error(ErrorCode::NonPositiveMass, "marginal entries must be strictly positive");
  }
  const double sum_mu = p.marginals.mu.sum();
  const double sum_nu = p.marginals.nu.sum();
  if (std::abs(sum_mu - sum_nu) > 1e-12 * std::max(sum_mu, sum_nu)) {
    std::ostringstream oss;
    oss << "sum(mu)=" << sum_mu << " != sum(nu)=" << sum_nu;
    throw Error(ErrorCode::MassImbalance, oss.str());
  }
  if (!p.cost.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "cost matrix contains NaN or infinity");
  }
  if ((p.cost.array() < 0.0).any()) {
    throw Error(ErrorCode::NegativeCost, "cost matrix entries must be non-negative");
  }
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) {
    std::ostringstream oss;
    oss << "beta=" << p.beta << " outside [0, 1]";
    throw Error(ErrorCode::PenaltyOutOfRange, oss.str());
  }
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) {
    std::ostringstream oss;
    oss << "epsilon=" << p.epsilon << " must be positive and finite";
    throw Error(ErrorCode::RegularizationOutOfRange, oss.str());
  }
  return p;
}

void validate_adjacency(const SparseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "adjacency must be square");
  }
  SparseMatrix diff = SparseMatrix(adjacency.transpose()) - adjacency;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > 0.0) {
        throw Error(ErrorCode::AsymmetricAdjacency, "adjacency is not symmetric");
      }
    }
  }
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adjacency, k); it; ++it) {
      if (it.value() < 0.0 || !std::isfinite(it.value())) {
        throw Error(ErrorCode::NegativeCost, "adjacency weights must be finite and non-negative");
      }
    }
  }
}

SparseMatrix laplacian(const SparseMatrix& adjacency) {
  validate_adjacency(adjacency);
  const int n = static_cast<int>(adjacency.rows());
  Vector degree = Vector::Zero(n);
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adjacency, k); it; ++it) {
      degree[it.row()] += it.value();
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(adjacency.nonZeros() + n);
  for (int i = 0; i < n; ++i) {
    if (degree[i] != 0.0) triplets.emplace_back(i, i, degree[i]);
  }
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adjacency, k); it; ++it) {
      if (it.row() == it.col()) continue;  // zero diagonal by invariant
      triplets.emplace_back(it.row(), it.col(), -it.value());
    }
  }
  SparseMatrix lap(n, n);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  return lap;
}

}  // namespace otalign

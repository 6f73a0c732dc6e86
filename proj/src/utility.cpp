#include "otalign/utility.hpp"

#include <cmath>

namespace otalign::utility {

namespace {

void check_spec(const UtilitySpec& spec, const Matrix& plan) {
  if (spec.kind == UtilityKind::Consistency) {
    if (!spec.laplacians) {
      throw Error(ErrorCode::MissingLaplacians, "consistency utility needs both Laplacians");
    }
    const auto& [m1, m2] = *spec.laplacians;
    if (m1.rows() != plan.rows() || m2.rows() != plan.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "Laplacians do not match plan dimensions");
    }
  } else if (spec.laplacians) {
    throw Error(ErrorCode::UnexpectedLaplacians,
                "Laplacians are only meaningful for the consistency utility");
  }
}

}  // namespace

UtilitySpec UtilitySpec::squared_l2() { return UtilitySpec{UtilityKind::SquaredL2, {}, false}; }

UtilitySpec UtilitySpec::entropy() { return UtilitySpec{UtilityKind::Entropy, {}, false}; }

UtilitySpec UtilitySpec::consistency(SparseMatrix m1, SparseMatrix m2) {
  return UtilitySpec{UtilityKind::Consistency, std::make_pair(std::move(m1), std::move(m2)),
                     false};
}

double value(const UtilitySpec& spec, const Matrix& plan) {
  check_spec(spec, plan);
  double out = 0.0;
  switch (spec.kind) {
    case UtilityKind::SquaredL2:
      out = plan.squaredNorm();
      break;
    case UtilityKind::Entropy: {
      for (int i = 0; i < plan.rows(); ++i) {
        for (int j = 0; j < plan.cols(); ++j) {
          const double t = plan(i, j);
          if (t > 0.0) out += t * std::log(t);
        }
      }
      break;
    }
    case UtilityKind::Consistency: {
      // tr(T'M1T) = sum (M1 T) .* T, and likewise for the second term.
      const auto& [m1, m2] = *spec.laplacians;
      const Matrix m1t = m1 * plan;
      const Matrix tm2 = plan * m2;
      out = m1t.cwiseProduct(plan).sum() + tm2.cwiseProduct(plan).sum();
      break;
    }
  }
  return spec.negate ? -out : out;
}

double value(const UtilitySpec& spec, const Coupling& coupling) {
  return value(spec, coupling.values);
}

Matrix gradient(const UtilitySpec& spec, const Matrix& plan) {
  check_spec(spec, plan);
  Matrix grad;
  switch (spec.kind) {
    case UtilityKind::SquaredL2:
      grad = 2.0 * plan;
      break;
    case UtilityKind::Entropy: {
      grad.resize(plan.rows(), plan.cols());
      const double floor_grad = std::log(kEntropyFloor) + 1.0;
      for (int i = 0; i < plan.rows(); ++i) {
        for (int j = 0; j < plan.cols(); ++j) {
          const double t = plan(i, j);
          grad(i, j) = t < kEntropyFloor ? floor_grad : std::log(t) + 1.0;
        }
      }
      break;
    }
    case UtilityKind::Consistency: {
      const auto& [m1, m2] = *spec.laplacians;
      grad = 2.0 * (m1 * plan) + 2.0 * (plan * m2);
      break;
    }
  }
  if (spec.negate) grad = -grad;
  return grad;
}

Matrix gradient(const UtilitySpec& spec, const Coupling& coupling) {
  return gradient(spec, coupling.values);
}

std::vector<double> support_gradient(const UtilitySpec& spec, const Coupling& coupling) {
  check_spec(spec, coupling.values);
  const PlanSupport& support = coupling.support;
  if (support.empty() && coupling.n() > 0) {
    throw Error(ErrorCode::ConfigError, "coupling has no support; call sparsify first");
  }
  const Matrix& plan = coupling.values;
  std::vector<double> grad(support.value.size());
  const double sign = spec.negate ? -1.0 : 1.0;

  switch (spec.kind) {
    case UtilityKind::SquaredL2: {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < support.n; ++i) {
        for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
          grad[k] = sign * 2.0 * support.value[k];
        }
      }
      break;
    }
    case UtilityKind::Entropy: {
      const double floor_grad = std::log(kEntropyFloor) + 1.0;
#pragma omp parallel for schedule(static)
      for (int i = 0; i < support.n; ++i) {
        for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
          const double t = support.value[k];
          grad[k] = sign * (t < kEntropyFloor ? floor_grad : std::log(t) + 1.0);
        }
      }
      break;
    }
    case UtilityKind::Consistency: {
      // (M1 T)[i,j] walks column i of the symmetric M1; (T M2)[i,j] walks
      // column j of M2. Both touch the dense plan at neighbour positions.
      const auto& [m1, m2] = *spec.laplacians;
#pragma omp parallel for schedule(static)
      for (int i = 0; i < support.n; ++i) {
        for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
          const int j = support.col_idx[k];
          double m1t = 0.0;
          for (SparseMatrix::InnerIterator it(m1, i); it; ++it) {
            m1t += it.value() * plan(it.row(), j);
          }
          double tm2 = 0.0;
          for (SparseMatrix::InnerIterator it(m2, j); it; ++it) {
            tm2 += plan(i, it.row()) * it.value();
          }
          grad[k] = sign * 2.0 * (m1t + tm2);
        }
      }
      break;
    }
  }
  return grad;
}

}  // namespace otalign::utility

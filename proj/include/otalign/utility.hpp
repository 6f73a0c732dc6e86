#pragma once

#include "otalign/types.hpp"

#include <optional>

namespace otalign::utility {

enum class UtilityKind { SquaredL2, Entropy, Consistency };

// Floor for entropy terms; gradients are consumed as T .* grad, so clamped
// entries contribute ~0 mass.
inline constexpr double kEntropyFloor = 1e-300;

struct UtilitySpec {
  UtilityKind kind = UtilityKind::SquaredL2;
  // Graph Laplacians of the two networks; required iff kind == Consistency.
  std::optional<std::pair<SparseMatrix, SparseMatrix>> laplacians;
  // Flips the sign of (value, gradient) together. Covers the direction
  // ambiguity of entropy-style utilities under argmax selection.
  bool negate = false;

  static UtilitySpec squared_l2();
  static UtilitySpec entropy();
  static UtilitySpec consistency(SparseMatrix m1, SparseMatrix m2);
};

// f(T):
//   SquaredL2   sum T[i,j]^2
//   Entropy     sum T[i,j] log T[i,j]   (0 log 0 := 0)
//   Consistency tr(T' M1 T) + tr(T M2 T')
double value(const UtilitySpec& spec, const Matrix& plan);
double value(const UtilitySpec& spec, const Coupling& coupling);

// grad f(T):
//   SquaredL2   2 T
//   Entropy     log T + 1, entries below the floor clamped to log(floor)+1
//   Consistency 2 M1 T + 2 T M2
Matrix gradient(const UtilitySpec& spec, const Matrix& plan);
Matrix gradient(const UtilitySpec& spec, const Coupling& coupling);

// The same gradient evaluated only at the support entries, aligned with
// coupling.support.value (row order). Costs O(nnz) for the entrywise
// utilities and O(nnz * degree) for consistency, so scoring rounds never
// touch the full n*m grid.
std::vector<double> support_gradient(const UtilitySpec& spec, const Coupling& coupling);

}  // namespace otalign::utility

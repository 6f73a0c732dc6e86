#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace otalign {

// Plans, costs and gradients are iterated row-wise in the hot loops, so the
// dense matrices are row-major throughout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class ErrorCode {
  DimensionMismatch,
  NonPositiveMass,
  MassImbalance,
  NegativeCost,
  NonFiniteValue,
  PenaltyOutOfRange,
  RegularizationOutOfRange,
  DuplicateSourcePair,
  IndexOutOfRange,
  AsymmetricAdjacency,
  MissingLaplacians,
  UnexpectedLaplacians,
  NumericalOverflow,
  GraphRequired,
  ZeroNormFeature,
  ParseError,
  EmptyEvaluationSet,
  InstanceTooLarge,
  InfeasibleParameters,
  ConfigError,
  OracleFailure,
};

const char* error_code_name(ErrorCode code);

// Validation and runtime failures carry a code naming the violated invariant
// so callers (and the CLI exit-code mapping) can dispatch without string
// matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Marginal distributions (mu over sources, nu over targets). Entries must be
// strictly positive and the total masses balanced.
struct Marginals {
  Vector mu;
  Vector nu;

  static Marginals uniform(int n, int m);
};

// Supervision as a partial map source -> target; equivalent to the binary
// matrix H with H[i,j]=1 iff pairs contains (i,j). At most one pair per
// source: the oracle answers with a single correct alignment.
class SupervisionSet {
 public:
  SupervisionSet() = default;
  SupervisionSet(int n, int m) : n_(n), m_(m) {}

  int n() const { return n_; }
  int m() const { return m_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  bool empty() const { return pairs_.empty(); }

  // Throws on out-of-range indices or a second pair for the same source.
  void add(int source, int target);
  bool has_source(int source) const { return pairs_.count(source) != 0; }
  // -1 when the source is unlabeled.
  int target_of(int source) const;

  const std::map<int, int>& pairs() const { return pairs_; }

  Matrix to_dense() const;

 private:
  int n_ = 0;
  int m_ = 0;
  std::map<int, int> pairs_;
};

// Sparse view of a transport plan: the entries a downstream matvec visits.
// Stored in both row-compressed and column-compressed order so that the
// adjoint operator can sweep either side with unit stride.
struct PlanSupport {
  int n = 0;
  int m = 0;
  std::vector<int> row_ptr;   // size n+1
  std::vector<int> col_idx;   // size nnz
  std::vector<double> value;  // T[i,j] in row order
  std::vector<int> col_ptr;   // size m+1
  std::vector<int> row_idx;   // size nnz
  std::vector<double> value_by_col;
  std::vector<int> csc_perm;  // row-order slot of each column-order slot

  int nnz() const { return static_cast<int>(col_idx.size()); }
  bool empty() const { return col_idx.empty(); }
  double retained_mass() const;
};

// A transport plan. `values` always holds the dense plan; `support` is
// populated by sinkhorn::sparsify and controls which entries the adjoint
// path visits. The duals (alpha, beta) recovered by the solver satisfy
// T[i,j] = exp((alpha[i] + beta[j] - C[i,j]) / epsilon).
struct Coupling {
  Matrix values;
  PlanSupport support;
  double marginal_violation = 0.0;
  Vector alpha;
  Vector beta;

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }
};

struct AlignmentProblem {
  int n = 0;
  int m = 0;
  Marginals marginals;
  Matrix cost;
  SupervisionSet supervision;
  double beta = 1.0;      // supervised-cost penalizing factor, in [0,1]
  double epsilon = 1e-2;  // entropic regularization weight, > 0
};

struct GraphPair {
  SparseMatrix adjacency_1;
  SparseMatrix adjacency_2;
};

// Returns the problem iff every invariant holds; throws Error otherwise.
const AlignmentProblem& validate_problem(const AlignmentProblem& p);

// D - A for a symmetric non-negative adjacency. The result is symmetric PSD:
// x'Lx = 1/2 sum_ij A[i,j] (x_i - x_j)^2.
SparseMatrix laplacian(const SparseMatrix& adjacency);

void validate_adjacency(const SparseMatrix& adjacency);

}  // namespace otalign

#pragma once

#include "otalign/sinkhorn.hpp"
#include "otalign/strategies.hpp"
#include "otalign/types.hpp"

#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

namespace otalign::active_loop {

// Answers "which target is the correct alignment of source i". Answers must
// be stable across calls.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual int answer(int source) = 0;
  // Called once per round before any queries; lets interactive oracles show
  // plan-ranked candidates.
  virtual void observe_plan(const Coupling&) {}
};

class GroundTruthOracle : public Oracle {
 public:
  explicit GroundTruthOracle(SupervisionSet truth) : truth_(std::move(truth)) {}
  int answer(int source) override;

 private:
  SupervisionSet truth_;
};

// Prompts a human on the terminal with the source id and the top-10
// plan-ranked candidate targets.
class ConsoleOracle : public Oracle {
 public:
  ConsoleOracle(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  int answer(int source) override;
  void observe_plan(const Coupling& coupling) override { plan_ = &coupling; }

 private:
  std::istream& in_;
  std::ostream& out_;
  const Coupling* plan_ = nullptr;
};

struct SessionConfig {
  int budget = 0;      // total queries k
  int batch_size = 0;  // n_b; 0 defaults to ceil(budget / 10)
  strategies::StrategySpec strategy;
  sinkhorn::SinkhornConfig sinkhorn;
  double sparsify_threshold = 1e-6;
  double cg_tolerance = 1e-8;
  int cg_max_iterations = 0;
  std::uint64_t seed = 0;
  bool dense_adjoint = false;  // ablation: score through the dense operator
};

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits5 = 0.0;
  double hits10 = 0.0;
  double recall1 = 0.0;  // identical to hits1
  int evaluated = 0;
};

struct RoundRecord {
  int round = 0;
  std::vector<int> queried;
  std::vector<int> answers;
  std::optional<Metrics> metrics;  // absent when the evaluation set is empty
  double drift_frobenius = 0.0;
  int sinkhorn_iters = 0;
  int cg_iters = 0;
  double elapsed_ms = 0.0;
  bool sinkhorn_converged = false;
  bool pool_exhausted = false;
  bool oracle_failed = false;
};

struct SessionLog {
  std::vector<RoundRecord> rounds;
  bool aborted = false;
  std::uint64_t seed = 0;  // root seed of the session, echoed per record

  // One JSON object per line with stable field names: round, queried,
  // answers, mrr, hits1, hits5, hits10, drift_frobenius, sinkhorn_iters,
  // cg_iters, elapsed_ms.
  void write_jsonl(std::ostream& out) const;
};

struct SessionResult {
  Coupling coupling;
  std::vector<int> queried;
  SessionLog log;
};

// mrr / hits@{1,5,10} / recall@1 of the plan against the ground truth,
// restricted to unlabeled sources. Rank ties break toward the lowest target
// index. Throws Error(EmptyEvaluationSet) when nothing is evaluable.
Metrics metrics(const Coupling& coupling, const SupervisionSet& ground_truth,
                const std::set<int>& labeled);

// || T_current - T_initial ||_F
double plan_drift(const Coupling& current, const Coupling& initial);

// Algorithm: remove pre-supervised sources from the pool, solve, then per
// round score / select a batch / query the oracle / grow H / re-solve, until
// the budget is spent or the pool empties.
SessionResult run_session(const AlignmentProblem& problem, const SessionConfig& config,
                          Oracle& oracle, const SupervisionSet* ground_truth = nullptr,
                          const SparseMatrix* source_adjacency = nullptr);

}  // namespace otalign::active_loop

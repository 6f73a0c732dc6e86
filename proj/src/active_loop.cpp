#include "otalign/active_loop.hpp"

#include "otalign/seeding.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

namespace otalign::active_loop {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int rank_of_target(const Matrix& plan, int i, int target) {
  const double reference = plan(i, target);
  int rank = 1;
  for (int j = 0; j < plan.cols(); ++j) {
    if (plan(i, j) > reference) ++rank;
    else if (plan(i, j) == reference && j < target) ++rank;
  }
  return rank;
}

}  // namespace

int GroundTruthOracle::answer(int source) {
  const int target = truth_.target_of(source);
  if (target < 0) {
    std::ostringstream oss;
    oss << "no ground-truth alignment for source " << source;
    throw Error(ErrorCode::OracleFailure, oss.str());
  }
  return target;
}

int ConsoleOracle::answer(int source) {
  out_ << "query: correct target for source " << source << "?\n";
  if (plan_ && source >= 0 && source < plan_->n()) {
    std::vector<std::pair<double, int>> ranked;
    for (int j = 0; j < plan_->m(); ++j) ranked.emplace_back(plan_->values(source, j), j);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    out_ << "  top candidates:";
    const int top = std::min<int>(10, static_cast<int>(ranked.size()));
    for (int t = 0; t < top; ++t) out_ << " " << ranked[t].second;
    out_ << "\n";
  }
  out_ << "target index> " << std::flush;
  int target = -1;
  if (!(in_ >> target)) {
    throw Error(ErrorCode::OracleFailure, "could not read an answer from the console");
  }
  return target;
}

Metrics metrics(const Coupling& coupling, const SupervisionSet& ground_truth,
                const std::set<int>& labeled) {
  if (ground_truth.n() != coupling.n() || ground_truth.m() != coupling.m()) {
    throw Error(ErrorCode::DimensionMismatch, "ground truth does not match coupling");
  }
  Metrics out;
  double reciprocal_sum = 0.0;
  for (const auto& [i, target] : ground_truth.pairs()) {
    if (labeled.count(i)) continue;
    const int rank = rank_of_target(coupling.values, i, target);
    reciprocal_sum += 1.0 / rank;
    out.hits1 += rank <= 1;
    out.hits5 += rank <= 5;
    out.hits10 += rank <= 10;
    ++out.evaluated;
  }
  if (out.evaluated == 0) {
    throw Error(ErrorCode::EmptyEvaluationSet, "no unlabeled sources with ground truth");
  }
  out.mrr = reciprocal_sum / out.evaluated;
  out.hits1 /= out.evaluated;
  out.hits5 /= out.evaluated;
  out.hits10 /= out.evaluated;
  out.recall1 = out.hits1;
  return out;
}

double plan_drift(const Coupling& current, const Coupling& initial) {
  if (current.n() != initial.n() || current.m() != initial.m()) {
    throw Error(ErrorCode::DimensionMismatch, "plans have different shapes");
  }
  return (current.values - initial.values).norm();
}

void SessionLog::write_jsonl(std::ostream& out) const {
  for (const RoundRecord& record : rounds) {
    nlohmann::json line;
    line["round"] = record.round;
    line["seed"] = seed;
    line["queried"] = record.queried;
    line["answers"] = record.answers;
    if (record.metrics) {
      line["mrr"] = record.metrics->mrr;
      line["hits1"] = record.metrics->hits1;
      line["hits5"] = record.metrics->hits5;
      line["hits10"] = record.metrics->hits10;
    } else {
      line["mrr"] = nullptr;
      line["hits1"] = nullptr;
      line["hits5"] = nullptr;
      line["hits10"] = nullptr;
    }
    line["drift_frobenius"] = record.drift_frobenius;
    line["sinkhorn_iters"] = record.sinkhorn_iters;
    line["cg_iters"] = record.cg_iters;
    line["elapsed_ms"] = record.elapsed_ms;
    line["sinkhorn_converged"] = record.sinkhorn_converged;
    line["pool_exhausted"] = record.pool_exhausted;
    line["oracle_failed"] = record.oracle_failed;
    out << line.dump() << "\n";
  }
}

SessionResult run_session(const AlignmentProblem& problem, const SessionConfig& config,
                          Oracle& oracle, const SupervisionSet* ground_truth,
                          const SparseMatrix* source_adjacency) {
  validate_problem(problem);
  if (config.budget < 0) {
    throw Error(ErrorCode::ConfigError, "budget must be non-negative");
  }
  const int batch_size =
      config.batch_size > 0 ? config.batch_size : std::max(1, (config.budget + 9) / 10);

  AlignmentProblem working = problem;
  std::vector<int> pool;
  for (int i = 0; i < problem.n; ++i) {
    if (!working.supervision.has_source(i)) pool.push_back(i);
  }
  std::set<int> labeled;
  for (const auto& [i, j] : working.supervision.pairs()) labeled.insert(i);

  SessionResult result;
  SessionLog& log = result.log;
  log.seed = config.seed;

  auto solve_and_record = [&](RoundRecord& record) {
    auto [coupling, report] = sinkhorn::solve(working, config.sinkhorn);
    coupling = sinkhorn::sparsify(std::move(coupling), config.sparsify_threshold);
    record.sinkhorn_iters = report.iterations_used;
    record.sinkhorn_converged = report.converged;
    result.coupling = std::move(coupling);
  };

  auto attach_metrics = [&](RoundRecord& record) {
    if (!ground_truth) return;
    try {
      record.metrics = metrics(result.coupling, *ground_truth, labeled);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyEvaluationSet) throw;
    }
  };

  // round 0: initial solve, no queries
  {
    RoundRecord record;
    record.round = 0;
    const auto start = Clock::now();
    solve_and_record(record);
    record.elapsed_ms = ms_since(start);
    attach_metrics(record);
    log.rounds.push_back(std::move(record));
  }
  const Coupling initial_coupling = result.coupling;

  int round = 0;
  while (static_cast<int>(result.queried.size()) < config.budget && !pool.empty()) {
    ++round;
    RoundRecord record;
    record.round = round;
    const auto start = Clock::now();

    oracle.observe_plan(result.coupling);

    strategies::ScoreContext context;
    context.problem = &working;
    context.labeled = &labeled;
    context.source_adjacency = source_adjacency;
    context.seed = derive_seed(config.seed, /*stream=*/1, round);
    context.cg_tolerance = config.cg_tolerance;
    context.cg_max_iterations = config.cg_max_iterations;
    context.dense_adjoint = config.dense_adjoint;

    const auto scores = strategies::score_all(config.strategy, pool, result.coupling, context);
    record.cg_iters = context.cg_iterations;

    const int remaining = config.budget - static_cast<int>(result.queried.size());
    bool exhausted = false;
    const std::vector<int> batch =
        strategies::select_batch(scores, pool, std::min(batch_size, remaining), &exhausted);
    record.pool_exhausted = exhausted || pool.empty();

    for (int source : batch) {
      int target = -1;
      try {
        target = oracle.answer(source);
      } catch (const Error&) {
        record.oracle_failed = true;
        break;
      }
      working.supervision.add(source, target);
      labeled.insert(source);
      result.queried.push_back(source);
      record.queried.push_back(source);
      record.answers.push_back(target);
    }

    if (record.oracle_failed) {
      record.elapsed_ms = ms_since(start);
      log.rounds.push_back(std::move(record));
      log.aborted = true;
      break;
    }

    solve_and_record(record);
    record.drift_frobenius = plan_drift(result.coupling, initial_coupling);
    attach_metrics(record);
    record.elapsed_ms = ms_since(start);
    const bool stop = record.pool_exhausted && pool.empty();
    log.rounds.push_back(std::move(record));
    if (stop) break;
  }

  return result;
}

}  // namespace otalign::active_loop

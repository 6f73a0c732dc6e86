#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otalign/active_loop.hpp"
#include "otalign/data.hpp"
#include "otalign/run_config.hpp"
#include "otalign/sinkhorn.hpp"

#include <nlohmann/json.hpp>

#include <numeric>
#include <random>
#include <sstream>

using namespace otalign;
using active_loop::SessionConfig;

namespace {

Coupling coupling_from_plan(Matrix plan) {
  Coupling c;
  c.values = std::move(plan);
  return sinkhorn::sparsify(std::move(c), 1e-300);
}

// plan whose row i ranks ground-truth target 0 at exactly ranks[i]:
// columns j >= 1 hold 1/(j+1) and the target holds 1/(rank + 0.5), so
// exactly rank-1 entries beat it and nothing ties. Needs m >= max rank.
Coupling plan_with_ranks(const std::vector<int>& ranks, int m) {
  const int n = static_cast<int>(ranks.size());
  Matrix plan(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j < m; ++j) plan(i, j) = 1.0 / (j + 1);
    plan(i, 0) = 1.0 / (ranks[i] + 0.5);
  }
  return coupling_from_plan(plan);
}

SupervisionSet identity_truth(int n, int m) {
  SupervisionSet truth(n, m);
  for (int i = 0; i < n; ++i) truth.add(i, 0);
  return truth;
}

config::RunConfig benchmark_config(int n, double epsilon) {
  config::RunConfig run;
  config::GeneratorSection generator;
  generator.er.n = n;
  generator.er.avg_degree = 10.0;
  generator.er.edge_noise = 0.1;
  generator.er.feature_noise = 0.3;
  run.generator = generator;
  run.normalize_cost = true;
  run.beta = 1.0;
  run.epsilon = epsilon;
  run.sinkhorn = {3000, 1e-7, true};
  return run;
}

}  // namespace

TEST_CASE("metrics on engineered ranks") {
  SUBCASE("permutation plan scores perfectly") {
    Matrix plan = Matrix::Constant(4, 4, 1e-9);
    for (int i = 0; i < 4; ++i) plan(i, i) = 0.25;
    SupervisionSet truth(4, 4);
    for (int i = 0; i < 4; ++i) truth.add(i, i);
    const auto metrics = active_loop::metrics(coupling_from_plan(plan), truth, {});
    CHECK(metrics.mrr == doctest::Approx(1.0));
    CHECK(metrics.hits1 == doctest::Approx(1.0));
    CHECK(metrics.recall1 == metrics.hits1);
  }

  SUBCASE("every correct target ranked 2nd gives MRR 0.5") {
    const auto coupling = plan_with_ranks({2, 2, 2}, 6);
    const auto metrics = active_loop::metrics(coupling, identity_truth(3, 6), {});
    CHECK(metrics.mrr == doctest::Approx(0.5));
    CHECK(metrics.hits1 == doctest::Approx(0.0));
    CHECK(metrics.hits5 == doctest::Approx(1.0));
  }

  SUBCASE("ranks {1,2,4,10} give the hand-computed MRR") {
    const auto coupling = plan_with_ranks({1, 2, 4, 10}, 12);
    const auto metrics = active_loop::metrics(coupling, identity_truth(4, 12), {});
    CHECK(metrics.mrr == doctest::Approx(0.4625).epsilon(1e-12));
    CHECK(metrics.hits1 == doctest::Approx(0.25));
    CHECK(metrics.hits5 == doctest::Approx(0.75));
    CHECK(metrics.hits10 == doctest::Approx(1.0));
  }

  SUBCASE("ties break toward the lowest target index") {
    Matrix plan(1, 3);
    plan << 0.2, 0.2, 0.2;
    SupervisionSet truth_first(1, 3);
    truth_first.add(0, 0);
    CHECK(active_loop::metrics(coupling_from_plan(plan), truth_first, {}).mrr ==
          doctest::Approx(1.0));
    SupervisionSet truth_last(1, 3);
    truth_last.add(0, 2);
    CHECK(active_loop::metrics(coupling_from_plan(plan), truth_last, {}).mrr ==
          doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("labeled sources are excluded; empty evaluation throws") {
    const auto coupling = plan_with_ranks({1, 2}, 4);
    const SupervisionSet truth = identity_truth(2, 4);
    const auto metrics = active_loop::metrics(coupling, truth, {0});
    CHECK(metrics.evaluated == 1);
    CHECK(metrics.mrr == doctest::Approx(0.5));
    CHECK_THROWS_AS(active_loop::metrics(coupling, truth, {0, 1}), Error);
  }
}

TEST_CASE("plan drift") {
  const Coupling a = coupling_from_plan(Matrix::Constant(3, 5, 0.1));
  CHECK(active_loop::plan_drift(a, a) == 0.0);

  Coupling b = a;
  b.values.array() += 0.01;
  CHECK(active_loop::plan_drift(b, a) ==
        doctest::Approx(0.01 * std::sqrt(15.0)).epsilon(1e-12));

  const Coupling c = coupling_from_plan(Matrix::Constant(3, 4, 0.1));
  CHECK_THROWS_AS(active_loop::plan_drift(c, a), Error);
}

TEST_CASE("session with zero budget solves once and logs a single round") {
  const config::RunConfig run = benchmark_config(30, 0.05);
  const data::Dataset dataset = config::realize_dataset(run, 5);
  const AlignmentProblem problem = config::build_problem(run, dataset);

  SessionConfig session;
  session.budget = 0;
  session.batch_size = 1;
  session.strategy.kind = strategies::StrategyKind::Random;
  session.sinkhorn = run.sinkhorn;
  session.seed = 5;

  active_loop::GroundTruthOracle oracle(dataset.ground_truth);
  const auto result =
      active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
  CHECK(result.queried.empty());
  CHECK(result.log.rounds.size() == 1);
  CHECK(result.log.rounds[0].drift_frobenius == 0.0);
  CHECK(result.log.rounds[0].metrics.has_value());
}

TEST_CASE("labeling the whole pool in one round") {
  const config::RunConfig run = benchmark_config(12, 0.05);
  const data::Dataset dataset = config::realize_dataset(run, 6);
  AlignmentProblem problem = config::build_problem(run, dataset);

  SessionConfig session;
  session.budget = 12;
  session.batch_size = 12;
  session.strategy.kind = strategies::StrategyKind::Entropy;
  session.sinkhorn = run.sinkhorn;
  session.seed = 6;

  active_loop::GroundTruthOracle oracle(dataset.ground_truth);
  const auto result =
      active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
  CHECK(result.queried.size() == 12);
  CHECK(result.log.rounds.size() == 2);
  // all sources labeled: no metrics for the final round
  CHECK_FALSE(result.log.rounds[1].metrics.has_value());
  CHECK(result.log.rounds[1].pool_exhausted);

  // with beta = 1 every queried pair's supervised cost entry is zero
  SupervisionSet supervision(12, 12);
  for (std::size_t k = 0; k < result.queried.size(); ++k) {
    supervision.add(result.log.rounds[1].queried[k], result.log.rounds[1].answers[k]);
  }
  const Matrix supervised = sinkhorn::build_supervised_cost(problem.cost, supervision, 1.0);
  for (const auto& [i, j] : supervision.pairs()) CHECK(supervised(i, j) == 0.0);
}

TEST_CASE("pool discipline: prior supervision never queried, rounds disjoint") {
  config::RunConfig run = benchmark_config(40, 0.05);
  run.prior_fraction = 0.25;
  const data::Dataset dataset = config::realize_dataset(run, 7);
  REQUIRE(dataset.prior.size() == 10);
  const AlignmentProblem problem = config::build_problem(run, dataset);

  SessionConfig session;
  session.budget = 12;
  session.batch_size = 4;
  session.strategy.kind = strategies::StrategyKind::Random;
  session.sinkhorn = run.sinkhorn;
  session.seed = 7;

  active_loop::GroundTruthOracle oracle(dataset.ground_truth);
  const auto result =
      active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
  CHECK(result.queried.size() == 12);

  std::set<int> seen;
  for (int i : result.queried) {
    CHECK_FALSE(dataset.prior.has_source(i));
    CHECK(seen.insert(i).second);  // no repeats
  }

  // supervision monotonicity: every round's queried set adds to the labels
  std::size_t cumulative = 0;
  for (const auto& record : result.log.rounds) {
    cumulative += record.queried.size();
  }
  CHECK(cumulative == 12);
}

TEST_CASE("oracle failure aborts the session and flags the log") {
  struct FailingOracle : active_loop::Oracle {
    int answer(int source) override {
      if (++calls >= 3) throw Error(ErrorCode::OracleFailure, "unavailable");
      return source;
    }
    int calls = 0;
  };

  const config::RunConfig run = benchmark_config(20, 0.05);
  const data::Dataset dataset = config::realize_dataset(run, 8);
  const AlignmentProblem problem = config::build_problem(run, dataset);

  SessionConfig session;
  session.budget = 10;
  session.batch_size = 5;
  session.strategy.kind = strategies::StrategyKind::Random;
  session.sinkhorn = run.sinkhorn;
  session.seed = 8;

  FailingOracle oracle;
  const auto result =
      active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
  CHECK(result.log.aborted);
  CHECK(result.log.rounds.back().oracle_failed);
  CHECK(result.queried.size() == 2);
}

TEST_CASE("sessions are deterministic apart from wall-clock fields") {
  const config::RunConfig run = benchmark_config(25, 0.05);

  auto run_once = [&run]() {
    const data::Dataset dataset = config::realize_dataset(run, 9);
    const AlignmentProblem problem = config::build_problem(run, dataset);
    SessionConfig session;
    session.budget = 6;
    session.batch_size = 2;
    session.strategy.kind = strategies::StrategyKind::Random;
    session.sinkhorn = run.sinkhorn;
    session.seed = 9;
    active_loop::GroundTruthOracle oracle(dataset.ground_truth);
    const auto result =
        active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
    std::ostringstream out;
    result.log.write_jsonl(out);
    // strip the wall-clock field, everything else must match bit for bit
    std::string filtered;
    std::istringstream lines(out.str());
    std::string line;
    while (std::getline(lines, line)) {
      auto parsed = nlohmann::json::parse(line);
      parsed.erase("elapsed_ms");
      filtered += parsed.dump() + "\n";
    }
    return filtered;
  };

  CHECK(run_once() == run_once());
}

TEST_CASE("jsonl carries the stable field names") {
  const config::RunConfig run = benchmark_config(15, 0.05);
  const data::Dataset dataset = config::realize_dataset(run, 10);
  const AlignmentProblem problem = config::build_problem(run, dataset);

  SessionConfig session;
  session.budget = 2;
  session.batch_size = 2;
  session.strategy = config::make_strategy("impact_l2_neg", dataset);
  session.sinkhorn = run.sinkhorn;
  session.seed = 10;

  active_loop::GroundTruthOracle oracle(dataset.ground_truth);
  const auto result =
      active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
  std::ostringstream out;
  result.log.write_jsonl(out);
  std::istringstream lines(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto parsed = nlohmann::json::parse(line);
    for (const char* field : {"round", "queried", "answers", "mrr", "hits1", "hits5",
                              "hits10", "drift_frobenius", "sinkhorn_iters", "cg_iters",
                              "elapsed_ms"}) {
      CHECK(parsed.contains(field));
    }
    ++rows;
  }
  CHECK(rows == 2);
  CHECK(result.log.rounds[1].cg_iters > 0);
}

TEST_CASE("console oracle prompts with ranked candidates and reads the answer") {
  Matrix plan(2, 5);
  plan << 0.05, 0.30, 0.10, 0.40, 0.15,
          0.20, 0.20, 0.20, 0.20, 0.20;
  const Coupling coupling = coupling_from_plan(plan);

  std::istringstream input("3\n");
  std::ostringstream output;
  active_loop::ConsoleOracle oracle(input, output);
  oracle.observe_plan(coupling);
  CHECK(oracle.answer(0) == 3);
  const std::string transcript = output.str();
  CHECK(transcript.find("source 0") != std::string::npos);
  CHECK(transcript.find("top candidates: 3 1 4 2 0") != std::string::npos);

  std::istringstream empty("");
  active_loop::ConsoleOracle failing(empty, output);
  CHECK_THROWS_AS(failing.answer(1), Error);
}

TEST_CASE("impact strategy beats random on the synthetic benchmark") {
  // n=100 noisy-permutation instance, budget 20, batches of 2, 5 seeds
  const int seeds[] = {1, 2, 3, 4, 5};
  double impact_total = 0.0;
  double random_total = 0.0;
  std::vector<double> mean_drift(11, 0.0);

  for (int seed : seeds) {
    const config::RunConfig run = benchmark_config(100, 0.05);
    const data::Dataset dataset = config::realize_dataset(run, seed);
    const AlignmentProblem problem = config::build_problem(run, dataset);

    for (bool use_impact : {true, false}) {
      SessionConfig session;
      session.budget = 20;
      session.batch_size = 2;
      session.strategy = config::make_strategy(use_impact ? "impact_l2_neg" : "random",
                                               dataset);
      session.sinkhorn = run.sinkhorn;
      session.seed = seed;
      active_loop::GroundTruthOracle oracle(dataset.ground_truth);
      const auto result =
          active_loop::run_session(problem, session, oracle, &dataset.ground_truth);
      REQUIRE(result.log.rounds.size() == 11);
      const double final_mrr = result.log.rounds.back().metrics->mrr;
      (use_impact ? impact_total : random_total) += final_mrr;
      if (use_impact) {
        for (int r = 0; r <= 10; ++r) mean_drift[r] += result.log.rounds[r].drift_frobenius;
      }
    }
  }
  CHECK(impact_total / 5.0 >= random_total / 5.0);

  // drift grows (in seed-mean) as supervision accumulates
  for (int r = 1; r <= 10; ++r) CHECK(mean_drift[r] >= mean_drift[r - 1] - 1e-12);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otalign/run_config.hpp"

using namespace otalign;

namespace {

const char* kFullConfig = R"({
  "generator": {"n": 100, "avg_degree": 10, "edge_noise": 0.1, "feature_noise": 0.3,
                "normalize_cost": true, "prior_fraction": 0.1},
  "problem": {"beta": 1.0, "epsilon": 0.05},
  "sinkhorn": {"max_iterations": 3000, "tolerance": 1e-7, "log_domain": true},
  "session": {"budget_fraction": 0.2, "batch_size": 2},
  "cg": {"tolerance": 1e-8, "max_iterations": 0},
  "sparsify_threshold": 1e-6,
  "strategies": ["impact_l2_neg", "random", "entropy"],
  "seeds": [1, 2, 3],
  "output": "out",
  "parallel": true
})";

}  // namespace

TEST_CASE("a full config parses into the expected fields") {
  const config::RunConfig run = config::parse_string(kFullConfig);
  CHECK(run.generator.has_value());
  CHECK_FALSE(run.dataset.has_value());
  CHECK(run.generator->er.n == 100);
  CHECK(run.normalize_cost);
  CHECK(run.prior_fraction == doctest::Approx(0.1));
  CHECK(run.beta == 1.0);
  CHECK(run.epsilon == doctest::Approx(0.05));
  CHECK(run.sinkhorn.max_iterations == 3000);
  CHECK(run.sinkhorn.tolerance == doctest::Approx(1e-7));
  CHECK(run.budget_fraction == doctest::Approx(0.2));
  CHECK(run.batch_size == 2);
  CHECK(run.strategies.size() == 3);
  CHECK(run.seeds == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("config errors name the offending field") {
  auto expect_mentions = [](const std::string& text, const std::string& needle) {
    try {
      config::parse_string(text);
      FAIL("expected a config error for ", needle);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_mentions(R"({"generator": {"n": 10}, "dataset": {}})", "dataset");
  expect_mentions(R"({})", "generator");
  expect_mentions(R"({"generator": {"n": 10}, "unknown_key": 1})", "unknown_key");
  expect_mentions(R"({"generator": {"n": 10, "typo": 1}})", "generator.typo");
  expect_mentions(R"({"generator": {"n": 10}, "strategies": ["nope"]})", "nope");
  expect_mentions(R"({"generator": {"n": 10}, "sparsify_threshold": 2.0})",
                  "sparsify_threshold");
  expect_mentions(R"({"generator": {"n": 10},
                      "session": {"budget": 5, "budget_fraction": 0.5}})",
                  "session");
  expect_mentions(R"({"generator": {"n": 1}})", "generator.n");
  expect_mentions("not json at all", "JSON");
}

TEST_CASE("strategy names map onto specs") {
  config::RunConfig run;
  config::GeneratorSection generator;
  generator.er = {30, 5.0, 0.0, 0.0};
  run.generator = generator;
  const data::Dataset dataset = config::realize_dataset(run, 1);

  const auto random = config::make_strategy("random", dataset);
  CHECK(random.kind == strategies::StrategyKind::Random);

  const auto impact = config::make_strategy("impact_l2", dataset);
  CHECK(impact.kind == strategies::StrategyKind::Impact);
  CHECK(impact.utility.kind == utility::UtilityKind::SquaredL2);
  CHECK_FALSE(impact.utility.negate);
  CHECK(impact.aggregation == strategies::ImpactAggregation::Posterior);

  const auto negated = config::make_strategy("impact_entropy_neg", dataset);
  CHECK(negated.utility.kind == utility::UtilityKind::Entropy);
  CHECK(negated.utility.negate);

  const auto uniform = config::make_strategy("impact_l2_neg_uniform", dataset);
  CHECK(uniform.utility.negate);
  CHECK(uniform.aggregation == strategies::ImpactAggregation::Uniform);

  const auto absolute = config::make_strategy("impact_l2_abs", dataset);
  CHECK(absolute.absolute_value);

  const auto consistency = config::make_strategy("impact_consistency", dataset);
  CHECK(consistency.utility.kind == utility::UtilityKind::Consistency);
  REQUIRE(consistency.utility.laplacians.has_value());
  CHECK(consistency.utility.laplacians->first.rows() == 30);

  CHECK_THROWS_AS(config::check_strategy_name("impact"), Error);
  CHECK_THROWS_AS(config::check_strategy_name("impact_l2_bogus"), Error);

  // graph-dependent strategies demand graphs
  data::Dataset graphless = dataset;
  graphless.graphs.reset();
  CHECK_THROWS_AS(config::make_strategy("impact_consistency", graphless), Error);
  CHECK_THROWS_AS(config::make_strategy("betweenness", graphless), Error);
}

TEST_CASE("budget resolution against the ground truth") {
  config::RunConfig run = config::parse_string(kFullConfig);
  const data::Dataset dataset = config::realize_dataset(run, 2);
  CHECK(config::resolve_budget(run, dataset) == 20);  // 0.2 * 100

  run.budget_fraction = -1.0;
  run.budget = 7;
  CHECK(config::resolve_budget(run, dataset) == 7);
}

TEST_CASE("session config wiring") {
  const config::RunConfig run = config::parse_string(kFullConfig);
  const data::Dataset dataset = config::realize_dataset(run, 3);
  const auto session = config::make_session_config(run, dataset, "impact_l2_neg", 3);
  CHECK(session.budget == 20);
  CHECK(session.batch_size == 2);
  CHECK(session.seed == 3);
  CHECK(session.strategy.name == "impact_l2_neg");
  CHECK(session.sinkhorn.tolerance == doctest::Approx(1e-7));
}

TEST_CASE("prior supervision is deterministic per seed and excluded from the pool") {
  const config::RunConfig run = config::parse_string(kFullConfig);
  const data::Dataset a = config::realize_dataset(run, 4);
  const data::Dataset b = config::realize_dataset(run, 4);
  CHECK(a.prior.pairs() == b.prior.pairs());
  CHECK(a.prior.size() == 10);  // 0.1 * 100
  for (const auto& [i, j] : a.prior.pairs()) CHECK(a.ground_truth.target_of(i) == j);
}

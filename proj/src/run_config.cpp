#include "otalign/run_config.hpp"

#include "otalign/seeding.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace otalign::config {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

void expect_keys(const json& object, const std::string& where,
                 const std::set<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) {
      config_fail(where.empty() ? key : where + "." + key, "unknown field");
    }
  }
}

template <typename T>
T get_or(const json& object, const std::string& key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    config_fail(key, "wrong type");
  }
}

data::CostMetric parse_metric(const std::string& text) {
  if (text == "squared_euclidean") return data::CostMetric::SquaredEuclidean;
  if (text == "cosine_distance") return data::CostMetric::CosineDistance;
  config_fail("cost_metric", "unknown metric '" + text + "'");
}

}  // namespace

RunConfig parse_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
  }
  expect_keys(root, "",
              {"dataset", "generator", "problem", "sinkhorn", "session", "cg",
               "sparsify_threshold", "strategies", "seeds", "output", "parallel",
               "dense_adjoint", "bench"});

  RunConfig config;

  const bool has_dataset = root.contains("dataset");
  const bool has_generator = root.contains("generator");
  if (has_dataset == has_generator) {
    throw Error(ErrorCode::ConfigError,
                "exactly one of 'dataset' and 'generator' must be present");
  }

  if (has_dataset) {
    const json& section = root.at("dataset");
    expect_keys(section, "dataset",
                {"graph1", "graph2", "features1", "features2", "cost", "ground_truth",
                 "prior_fraction", "cost_metric", "normalize_cost"});
    DatasetSection dataset;
    dataset.paths.graph_1 = get_or<std::string>(section, "graph1", "");
    dataset.paths.graph_2 = get_or<std::string>(section, "graph2", "");
    dataset.paths.features_1 = get_or<std::string>(section, "features1", "");
    dataset.paths.features_2 = get_or<std::string>(section, "features2", "");
    dataset.paths.cost = get_or<std::string>(section, "cost", "");
    dataset.paths.ground_truth = get_or<std::string>(section, "ground_truth", "");
    config.prior_fraction = get_or<double>(section, "prior_fraction", 0.0);
    config.cost_metric =
        parse_metric(get_or<std::string>(section, "cost_metric", "squared_euclidean"));
    config.normalize_cost = get_or<bool>(section, "normalize_cost", false);
    config.dataset = std::move(dataset);
  } else {
    const json& section = root.at("generator");
    expect_keys(section, "generator",
                {"n", "avg_degree", "edge_noise", "feature_noise", "prior_fraction",
                 "cost_metric", "normalize_cost"});
    GeneratorSection generator;
    generator.er.n = get_or<int>(section, "n", 0);
    generator.er.avg_degree = get_or<double>(section, "avg_degree", 10.0);
    generator.er.edge_noise = get_or<double>(section, "edge_noise", 0.0);
    generator.er.feature_noise = get_or<double>(section, "feature_noise", 0.0);
    if (generator.er.n < 2) config_fail("generator.n", "need n >= 2");
    config.prior_fraction = get_or<double>(section, "prior_fraction", 0.0);
    config.cost_metric =
        parse_metric(get_or<std::string>(section, "cost_metric", "squared_euclidean"));
    config.normalize_cost = get_or<bool>(section, "normalize_cost", false);
    config.generator = std::move(generator);
  }

  if (root.contains("problem")) {
    const json& section = root.at("problem");
    expect_keys(section, "problem", {"beta", "epsilon"});
    config.beta = get_or<double>(section, "beta", 1.0);
    config.epsilon = get_or<double>(section, "epsilon", 1e-2);
  }

  if (root.contains("sinkhorn")) {
    const json& section = root.at("sinkhorn");
    expect_keys(section, "sinkhorn", {"max_iterations", "tolerance", "log_domain"});
    config.sinkhorn.max_iterations = get_or<int>(section, "max_iterations", 10000);
    config.sinkhorn.tolerance = get_or<double>(section, "tolerance", 1e-9);
    config.sinkhorn.log_domain = get_or<bool>(section, "log_domain", true);
  }

  if (root.contains("session")) {
    const json& section = root.at("session");
    expect_keys(section, "session", {"budget", "budget_fraction", "batch_size"});
    if (section.contains("budget") && section.contains("budget_fraction")) {
      config_fail("session", "give either budget or budget_fraction, not both");
    }
    config.budget = get_or<int>(section, "budget", 0);
    config.budget_fraction = get_or<double>(section, "budget_fraction", -1.0);
    config.batch_size = get_or<int>(section, "batch_size", 0);
    if (config.budget < 0) config_fail("session.budget", "must be non-negative");
    if (section.contains("budget_fraction") &&
        !(config.budget_fraction >= 0.0 && config.budget_fraction <= 1.0)) {
      config_fail("session.budget_fraction", "must lie in [0, 1]");
    }
  }

  if (root.contains("cg")) {
    const json& section = root.at("cg");
    expect_keys(section, "cg", {"tolerance", "max_iterations"});
    config.cg_tolerance = get_or<double>(section, "tolerance", 1e-8);
    config.cg_max_iterations = get_or<int>(section, "max_iterations", 0);
  }

  config.sparsify_threshold = get_or<double>(root, "sparsify_threshold", 1e-6);
  if (!(config.sparsify_threshold > 0.0 && config.sparsify_threshold < 1.0)) {
    config_fail("sparsify_threshold", "must lie in (0, 1)");
  }

  config.strategies = get_or<std::vector<std::string>>(root, "strategies", {});
  for (const std::string& name : config.strategies) check_strategy_name(name);

  config.seeds = get_or<std::vector<std::uint64_t>>(root, "seeds", {});
  config.output = get_or<std::string>(root, "output", "out");
  config.parallel = get_or<bool>(root, "parallel", true);
  config.dense_adjoint = get_or<bool>(root, "dense_adjoint", false);

  if (root.contains("bench")) {
    const json& section = root.at("bench");
    expect_keys(section, "bench", {"sizes", "repeats", "compare_dense"});
    config.bench.sizes = get_or<std::vector<int>>(section, "sizes", {});
    config.bench.repeats = get_or<int>(section, "repeats", 3);
    config.bench.compare_dense = get_or<bool>(section, "compare_dense", true);
  }

  return config;
}

RunConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open config " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

namespace {

struct ParsedStrategyName {
  strategies::StrategyKind kind;
  utility::UtilityKind utility = utility::UtilityKind::SquaredL2;
  bool has_utility = false;
  bool negate = false;
  bool uniform = false;
  bool absolute = false;
};

ParsedStrategyName parse_strategy_name(const std::string& name) {
  static const std::map<std::string, strategies::StrategyKind> plain = {
      {"random", strategies::StrategyKind::Random},
      {"entropy", strategies::StrategyKind::Entropy},
      {"margin", strategies::StrategyKind::Margin},
      {"least_confident", strategies::StrategyKind::LeastConfident},
      {"density", strategies::StrategyKind::Density},
      {"diversity", strategies::StrategyKind::Diversity},
      {"betweenness", strategies::StrategyKind::Betweenness},
  };
  if (auto it = plain.find(name); it != plain.end()) {
    return ParsedStrategyName{it->second};
  }

  ParsedStrategyName parsed;
  parsed.kind = strategies::StrategyKind::Impact;
  std::vector<std::string> tokens;
  std::istringstream stream(name);
  std::string token;
  while (std::getline(stream, token, '_')) tokens.push_back(token);
  if (tokens.empty() || tokens[0] != "impact") {
    config_fail("strategies", "unknown strategy '" + name + "'");
  }
  std::size_t t = 1;
  if (t < tokens.size()) {
    if (tokens[t] == "l2") {
      parsed.utility = utility::UtilityKind::SquaredL2;
      parsed.has_utility = true;
      ++t;
    } else if (tokens[t] == "entropy") {
      parsed.utility = utility::UtilityKind::Entropy;
      parsed.has_utility = true;
      ++t;
    } else if (tokens[t] == "consistency") {
      parsed.utility = utility::UtilityKind::Consistency;
      parsed.has_utility = true;
      ++t;
    }
  }
  if (!parsed.has_utility) {
    config_fail("strategies", "impact strategy needs a utility, e.g. impact_l2");
  }
  for (; t < tokens.size(); ++t) {
    if (tokens[t] == "neg") parsed.negate = true;
    else if (tokens[t] == "uniform") parsed.uniform = true;
    else if (tokens[t] == "abs") parsed.absolute = true;
    else config_fail("strategies", "unknown modifier '" + tokens[t] + "' in '" + name + "'");
  }
  return parsed;
}

}  // namespace

void check_strategy_name(const std::string& name) { parse_strategy_name(name); }

strategies::StrategySpec make_strategy(const std::string& name, const data::Dataset& dataset) {
  const ParsedStrategyName parsed = parse_strategy_name(name);
  strategies::StrategySpec spec;
  spec.kind = parsed.kind;
  spec.name = name;
  if (parsed.kind == strategies::StrategyKind::Impact) {
    spec.utility.kind = parsed.utility;
    spec.utility.negate = parsed.negate;
    if (parsed.utility == utility::UtilityKind::Consistency) {
      if (!dataset.graphs) {
        throw Error(ErrorCode::GraphRequired, "consistency utility needs the graph pair");
      }
      spec.utility.laplacians = std::make_pair(laplacian(dataset.graphs->adjacency_1),
                                               laplacian(dataset.graphs->adjacency_2));
    }
    spec.aggregation = parsed.uniform ? strategies::ImpactAggregation::Uniform
                                      : strategies::ImpactAggregation::Posterior;
    spec.absolute_value = parsed.absolute;
  }
  if (spec.kind == strategies::StrategyKind::Betweenness && !dataset.graphs) {
    throw Error(ErrorCode::GraphRequired, "betweenness needs the source graph");
  }
  return spec;
}

data::Dataset realize_dataset(const RunConfig& config, std::uint64_t seed) {
  data::Dataset dataset;
  if (config.generator) {
    dataset = data::generate_er_pair(config.generator->er, seed);
    dataset.prior_fraction = config.prior_fraction;
    dataset.prior =
        data::sample_prior(dataset.ground_truth, config.prior_fraction, derive_seed(seed, 21));
  } else {
    dataset = data::load_dataset(config.dataset->paths, config.prior_fraction, seed);
  }
  return dataset;
}

AlignmentProblem build_problem(const RunConfig& config, const data::Dataset& dataset) {
  AlignmentProblem problem;
  problem.n = dataset.n;
  problem.m = dataset.m;
  problem.marginals = Marginals::uniform(dataset.n, dataset.m);
  if (dataset.cost) {
    problem.cost = *dataset.cost;
  } else if (dataset.features_1 && dataset.features_2) {
    problem.cost =
        data::cost_from_features(*dataset.features_1, *dataset.features_2, config.cost_metric);
  } else {
    throw Error(ErrorCode::ConfigError, "dataset provides neither cost nor features");
  }
  if (config.normalize_cost) {
    const double max_cost = problem.cost.maxCoeff();
    if (max_cost > 0.0) problem.cost /= max_cost;
  }
  problem.supervision = dataset.prior;
  problem.beta = config.beta;
  problem.epsilon = config.epsilon;
  return validate_problem(problem);
}

int resolve_budget(const RunConfig& config, const data::Dataset& dataset) {
  if (config.budget_fraction >= 0.0) {
    return static_cast<int>(std::llround(config.budget_fraction * dataset.ground_truth.size()));
  }
  return config.budget;
}

active_loop::SessionConfig make_session_config(const RunConfig& config,
                                               const data::Dataset& dataset,
                                               const std::string& strategy_name,
                                               std::uint64_t seed) {
  active_loop::SessionConfig session;
  session.budget = resolve_budget(config, dataset);
  session.batch_size = config.batch_size;
  session.strategy = make_strategy(strategy_name, dataset);
  session.sinkhorn = config.sinkhorn;
  session.sparsify_threshold = config.sparsify_threshold;
  session.cg_tolerance = config.cg_tolerance;
  session.cg_max_iterations = config.cg_max_iterations;
  session.seed = seed;
  session.dense_adjoint = config.dense_adjoint;
  return session;
}

}  // namespace otalign::config

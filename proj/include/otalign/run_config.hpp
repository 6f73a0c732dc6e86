#pragma once

#include "otalign/active_loop.hpp"
#include "otalign/data.hpp"
#include "otalign/sinkhorn.hpp"
#include "otalign/strategies.hpp"
#include "otalign/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace otalign::config {

struct GeneratorSection {
  data::ErConfig er;
};

struct DatasetSection {
  data::DatasetPaths paths;
};

struct BenchSection {
  std::vector<int> sizes;
  int repeats = 3;
  bool compare_dense = true;
};

// One structured document drives every subcommand; flags override the
// top-level fields (seed, output, parallel).
struct RunConfig {
  // exactly one of the two data sources
  std::optional<DatasetSection> dataset;
  std::optional<GeneratorSection> generator;

  data::CostMetric cost_metric = data::CostMetric::SquaredEuclidean;
  bool normalize_cost = false;
  double prior_fraction = 0.0;

  double beta = 1.0;
  double epsilon = 1e-2;

  sinkhorn::SinkhornConfig sinkhorn;

  int budget = 0;
  double budget_fraction = -1.0;  // of the ground-truth size; <0 means unset
  int batch_size = 0;

  double cg_tolerance = 1e-8;
  int cg_max_iterations = 0;
  double sparsify_threshold = 1e-6;

  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;

  std::string output = "out";
  bool parallel = true;
  bool dense_adjoint = false;

  BenchSection bench;
};

RunConfig parse_file(const std::string& path);
RunConfig parse_string(const std::string& text);

// "random" | "entropy" | "margin" | "least_confident" | "density" |
// "diversity" | "betweenness" | "impact_<l2|entropy|consistency>" with
// optional modifiers "_neg" (flip the utility sign), "_uniform" (unweighted
// aggregation), "_abs" (rank by magnitude). Throws ConfigError for anything
// else. Laplacians for the consistency utility come from the dataset graphs.
strategies::StrategySpec make_strategy(const std::string& name, const data::Dataset& dataset);

// Checks the name without needing a dataset.
void check_strategy_name(const std::string& name);

data::Dataset realize_dataset(const RunConfig& config, std::uint64_t seed);

AlignmentProblem build_problem(const RunConfig& config, const data::Dataset& dataset);

// budget resolved against the dataset's ground truth when budget_fraction
// is set.
int resolve_budget(const RunConfig& config, const data::Dataset& dataset);

active_loop::SessionConfig make_session_config(const RunConfig& config,
                                               const data::Dataset& dataset,
                                               const std::string& strategy_name,
                                               std::uint64_t seed);

}  // namespace otalign::config

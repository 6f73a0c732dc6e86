#include "otalign/active_loop.hpp"
#include "otalign/bench.hpp"
#include "otalign/data.hpp"
#include "otalign/gradcheck.hpp"
#include "otalign/kernels.hpp"
#include "otalign/run_config.hpp"
#include "otalign/seeding.hpp"
#include "otalign/sinkhorn.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace otalign;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitGradcheck = 5;

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::ConfigError:
      return kExitConfig;
    case ErrorCode::NumericalOverflow:
      return kExitConvergence;
    default:
      return kExitData;
  }
}

struct CommonOptions {
  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  bool serial = false;
};

config::RunConfig load_config(const CommonOptions& options) {
  config::RunConfig run = config::parse_file(options.config_path);
  if (!options.out_override.empty()) run.output = options.out_override;
  if (options.seed_override) run.seeds = {*options.seed_override};
  if (run.seeds.empty()) run.seeds = {0};
  if (options.serial) run.parallel = false;
  kernels::use_parallel(run.parallel);
  return run;
}

fs::path ensure_output_dir(const config::RunConfig& run) {
  fs::path dir(run.output);
  fs::create_directories(dir);
  return dir;
}

json metrics_to_json(const active_loop::Metrics& metrics) {
  return json{{"mrr", metrics.mrr},       {"hits1", metrics.hits1},
              {"hits5", metrics.hits5},   {"hits10", metrics.hits10},
              {"recall1", metrics.recall1}, {"evaluated", metrics.evaluated}};
}

int cmd_solve(const CommonOptions& options, bool emit_plan) {
  const config::RunConfig run = load_config(options);
  const fs::path out_dir = ensure_output_dir(run);
  const std::uint64_t seed = run.seeds.front();

  const data::Dataset dataset = config::realize_dataset(run, seed);
  const AlignmentProblem problem = config::build_problem(run, dataset);

  auto [coupling, report] = sinkhorn::solve(problem, run.sinkhorn);

  json output;
  output["seed"] = seed;
  output["iterations"] = report.iterations_used;
  output["violation"] = report.final_violation;
  output["converged"] = report.converged;
  if (dataset.ground_truth.size() > 0) {
    std::set<int> labeled;
    for (const auto& [i, j] : dataset.prior.pairs()) labeled.insert(i);
    output["metrics"] = metrics_to_json(active_loop::metrics(coupling, dataset.ground_truth,
                                                             labeled));
  }
  std::ofstream metrics_file(out_dir / "metrics.json");
  metrics_file << output.dump(2) << "\n";
  std::cout << output.dump(2) << std::endl;

  if (emit_plan) {
    data::save_matrix_csv((out_dir / "plan.csv").string(), coupling.values);
  }
  if (!report.converged) {
    std::cerr << "sinkhorn did not converge within " << run.sinkhorn.max_iterations
              << " iterations (violation " << report.final_violation << ")\n";
    return kExitConvergence;
  }
  return kExitOk;
}

int cmd_gradcheck(const CommonOptions& options) {
  const config::RunConfig run = load_config(options);
  const fs::path out_dir = ensure_output_dir(run);
  const std::uint64_t seed = run.seeds.front();

  const data::Dataset dataset = config::realize_dataset(run, seed);
  const AlignmentProblem problem = config::build_problem(run, dataset);

  std::vector<utility::UtilitySpec> utilities = {utility::UtilitySpec::squared_l2(),
                                                 utility::UtilitySpec::entropy()};
  std::vector<std::string> names = {"squared_l2", "entropy"};
  if (dataset.graphs) {
    utilities.push_back(utility::UtilitySpec::consistency(
        laplacian(dataset.graphs->adjacency_1), laplacian(dataset.graphs->adjacency_2)));
    names.push_back("consistency");
  }

  sinkhorn::SinkhornConfig solver = run.sinkhorn;
  solver.tolerance = std::min(solver.tolerance, 1e-12);
  solver.max_iterations = std::max(solver.max_iterations, 200000);

  const auto report = gradcheck::run(problem, utilities, names, /*delta=*/1e-5,
                                     /*threshold=*/1e-3, solver);

  json output;
  output["seed"] = seed;
  output["worst_error"] = report.worst_error;
  output["passed"] = report.passed;
  for (const auto& check : report.checks) {
    output["utilities"][check.utility] = check.max_error;
    std::cout << check.utility << ": max normalized error " << check.max_error << "\n";
  }
  std::ofstream report_file(out_dir / "gradcheck.json");
  report_file << output.dump(2) << "\n";

  if (!report.passed) {
    std::cerr << "gradient check failed: worst error " << report.worst_error << " > 1e-3\n";
    return kExitGradcheck;
  }
  return kExitOk;
}

int cmd_run(const CommonOptions& options) {
  const config::RunConfig run = load_config(options);
  const fs::path out_dir = ensure_output_dir(run);
  if (run.strategies.empty()) {
    throw Error(ErrorCode::ConfigError, "cmd run needs a non-empty strategies list");
  }

  struct Row {
    std::string strategy;
    std::uint64_t seed;
    bool failed = false;
    double mrr = std::nan("");
    double hits1 = std::nan("");
    double hits5 = std::nan("");
    double hits10 = std::nan("");
    double drift = std::nan("");
  };
  std::vector<Row> rows;
  int worst_exit = kExitOk;

  for (const std::string& strategy_name : run.strategies) {
    for (std::uint64_t seed : run.seeds) {
      Row row;
      row.strategy = strategy_name;
      row.seed = seed;
      try {
        const data::Dataset dataset = config::realize_dataset(run, seed);
        const AlignmentProblem problem = config::build_problem(run, dataset);
        const active_loop::SessionConfig session =
            config::make_session_config(run, dataset, strategy_name, seed);
        active_loop::GroundTruthOracle oracle(dataset.ground_truth);
        const SparseMatrix* source_graph =
            dataset.graphs ? &dataset.graphs->adjacency_1 : nullptr;
        const auto result = active_loop::run_session(problem, session, oracle,
                                                     &dataset.ground_truth, source_graph);
        const fs::path log_path =
            out_dir / (strategy_name + "_seed" + std::to_string(seed) + ".jsonl");
        std::ofstream log_file(log_path);
        result.log.write_jsonl(log_file);

        const auto& last = result.log.rounds.back();
        if (last.metrics) {
          row.mrr = last.metrics->mrr;
          row.hits1 = last.metrics->hits1;
          row.hits5 = last.metrics->hits5;
          row.hits10 = last.metrics->hits10;
        }
        row.drift = last.drift_frobenius;
        if (result.log.aborted) {
          row.failed = true;
          worst_exit = std::max(worst_exit, kExitData);
        }
      } catch (const Error& e) {
        std::cerr << strategy_name << " seed " << seed << " failed: " << e.what() << "\n";
        row.failed = true;
        worst_exit = std::max(worst_exit, exit_code_for(e));
      }
      rows.push_back(std::move(row));
    }
  }

  // summary: final-round metrics, mean +/- std per strategy
  std::ofstream summary(out_dir / "summary.csv");
  summary << "strategy,seeds,mean_mrr,std_mrr,mean_hits1,mean_hits5,mean_hits10,mean_drift,"
             "failures\n";
  for (const std::string& strategy_name : run.strategies) {
    std::vector<double> mrrs, hits1s, hits5s, hits10s, drifts;
    int failures = 0;
    for (const Row& row : rows) {
      if (row.strategy != strategy_name) continue;
      if (row.failed || std::isnan(row.mrr)) {
        ++failures;
        continue;
      }
      mrrs.push_back(row.mrr);
      hits1s.push_back(row.hits1);
      hits5s.push_back(row.hits5);
      hits10s.push_back(row.hits10);
      drifts.push_back(row.drift);
    }
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    };
    auto stddev = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double mu = mean(v);
      double acc = 0.0;
      for (double x : v) acc += (x - mu) * (x - mu);
      return std::sqrt(acc / (v.size() - 1));
    };
    summary << strategy_name << "," << run.seeds.size() << "," << mean(mrrs) << ","
            << stddev(mrrs) << "," << mean(hits1s) << "," << mean(hits5s) << ","
            << mean(hits10s) << "," << mean(drifts) << "," << failures << "\n";
  }
  std::cout << "wrote " << (out_dir / "summary.csv") << std::endl;
  return worst_exit;
}

int cmd_bench(const CommonOptions& options) {
  const config::RunConfig run = load_config(options);
  const fs::path out_dir = ensure_output_dir(run);
  const std::uint64_t seed = run.seeds.front();

  std::ofstream csv(out_dir / "bench.csv");
  csv << "n,m,strategy,path,seconds,cg_iterations\n";

  std::vector<double> sizes_for_fit;
  std::vector<double> times_for_fit;

  auto bench_instance = [&](const config::RunConfig& conf, const std::string& label) {
    const data::Dataset dataset = config::realize_dataset(conf, seed);
    const AlignmentProblem problem = config::build_problem(conf, dataset);
    auto [coupling, report] = sinkhorn::solve(problem, conf.sinkhorn);
    coupling = sinkhorn::sparsify(std::move(coupling), conf.sparsify_threshold);
    if (!report.converged) {
      std::cerr << label << ": sinkhorn stopped at violation " << report.final_violation
                << "\n";
    }
    std::vector<std::string> names =
        conf.strategies.empty() ? std::vector<std::string>{"impact_l2_neg"} : conf.strategies;
    for (const std::string& name : names) {
      const strategies::StrategySpec spec = config::make_strategy(name, dataset);
      const auto sparse_timing = bench::time_scoring_round(spec, problem, coupling,
                                                           /*dense_adjoint=*/false,
                                                           conf.bench.repeats,
                                                           conf.cg_tolerance);
      csv << problem.n << "," << problem.m << "," << name << ",sparse,"
          << sparse_timing.seconds << "," << sparse_timing.cg_iterations << "\n";
      if (spec.kind == strategies::StrategyKind::Impact) {
        sizes_for_fit.push_back(static_cast<double>(problem.n + problem.m));
        times_for_fit.push_back(sparse_timing.seconds);
      }
      if (conf.bench.compare_dense && spec.kind == strategies::StrategyKind::Impact) {
        const auto dense_timing = bench::time_scoring_round(spec, problem, coupling,
                                                            /*dense_adjoint=*/true,
                                                            conf.bench.repeats,
                                                            conf.cg_tolerance);
        csv << problem.n << "," << problem.m << "," << name << ",dense,"
            << dense_timing.seconds << "," << dense_timing.cg_iterations << "\n";
        std::cout << label << " " << name << ": sparse " << sparse_timing.seconds
                  << "s, dense " << dense_timing.seconds << "s (ratio "
                  << dense_timing.seconds / sparse_timing.seconds << "x)\n";
      } else {
        std::cout << label << " " << name << ": sparse " << sparse_timing.seconds << "s\n";
      }
    }
  };

  if (!run.bench.sizes.empty()) {
    if (!run.generator) {
      throw Error(ErrorCode::ConfigError, "bench size sweeps need the generator section");
    }
    for (int n : run.bench.sizes) {
      config::RunConfig scaled = run;
      scaled.generator->er.n = n;
      bench_instance(scaled, "n=" + std::to_string(n));
    }
    if (sizes_for_fit.size() >= 2) {
      const auto fit = bench::fit_linear(sizes_for_fit, times_for_fit);
      std::cout << "scoring time ~ " << fit.slope << "*(n+m) + " << fit.intercept
                << ", R^2 = " << fit.r_squared << std::endl;
      std::ofstream fit_file(out_dir / "bench_fit.json");
      fit_file << json{{"slope", fit.slope},
                       {"intercept", fit.intercept},
                       {"r_squared", fit.r_squared}}
                      .dump(2)
               << "\n";
    }
  } else {
    bench_instance(run, "base");
  }
  std::cout << "wrote " << (out_dir / "bench.csv") << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy-regularized OT alignment with actively acquired supervision"};
  app.require_subcommand(1);

  CommonOptions options;
  bool emit_plan = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", options.config_path, "JSON config path")->required();
    cmd->add_option("--seed", options.seed_override, "override the seed list with one seed");
    cmd->add_option("--out", options.out_override, "override the output directory");
    cmd->add_flag("--serial", options.serial, "disable the OpenMP kernels");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve once and report round-0 metrics");
  add_common(solve);
  solve->add_flag("--emit-plan", emit_plan, "also write the dense plan as CSV");

  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "verify adjoint gradients against finite differences");
  add_common(gradcheck_cmd);

  CLI::App* run_cmd = app.add_subcommand("run", "run query sessions per strategy and seed");
  add_common(run_cmd);

  CLI::App* bench_cmd = app.add_subcommand("bench", "time scoring rounds and paths");
  add_common(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(options, emit_plan);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(options);
    if (run_cmd->parsed()) return cmd_run(options);
    if (bench_cmd->parsed()) return cmd_bench(options);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitData;
  }
  return kExitOk;
}

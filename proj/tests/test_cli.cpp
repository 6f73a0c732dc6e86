#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otalign/data.hpp"
#include "otalign/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using otalign::Matrix;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("otalign_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string command = std::string(OTALIGN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string small_generator_config(const std::string& out_dir, const std::string& extra = "") {
  return R"({
    "generator": {"n": 40, "avg_degree": 6, "edge_noise": 0.1, "feature_noise": 0.2,
                  "normalize_cost": true},
    "problem": {"beta": 1.0, "epsilon": 0.05},
    "sinkhorn": {"max_iterations": 3000, "tolerance": 1e-9, "log_domain": true},
    "session": {"budget": 8, "batch_size": 4},
    "strategies": ["impact_l2_neg", "random"],
    "seeds": [1, 2],
    "output": ")" + out_dir + "\"" + extra + "\n}";
}

}  // namespace

TEST_CASE("solve writes metrics and an optional plan whose rows sum to mu") {
  TempDir dir;
  write_file(dir.file("config.json"), small_generator_config(dir.file("out")));
  const int code =
      run_cli("solve --config " + dir.file("config.json") + " --emit-plan --seed 3");
  CHECK(code == 0);

  const json metrics = json::parse(read_file(dir.file("out") + "/metrics.json"));
  CHECK(metrics["converged"].get<bool>());
  CHECK(metrics["violation"].get<double>() <= 1e-9);
  CHECK(metrics.contains("metrics"));
  CHECK(metrics["metrics"]["mrr"].get<double>() > 0.0);

  const Matrix plan = otalign::data::load_matrix_csv(dir.file("out") + "/plan.csv");
  REQUIRE(plan.rows() == 40);
  for (int i = 0; i < plan.rows(); ++i) {
    CHECK(plan.row(i).sum() == doctest::Approx(1.0 / 40).epsilon(1e-6));
  }
}

TEST_CASE("malformed configs exit with the config code") {
  TempDir dir;
  write_file(dir.file("bad.json"), R"({"generator": {"n": 40}, "oops": 1})");
  CHECK(run_cli("solve --config " + dir.file("bad.json")) == 2);
  CHECK(run_cli("solve --config " + dir.file("missing.json")) == 2);
  write_file(dir.file("badstrat.json"),
             R"({"generator": {"n": 40}, "strategies": ["what"]})");
  CHECK(run_cli("run --config " + dir.file("badstrat.json")) == 2);
}

TEST_CASE("data errors exit with the data code") {
  TempDir dir;
  write_file(dir.file("gt.txt"), "0 1\n0 2\n");  // duplicate source
  Matrix cost(3, 3);
  cost.setZero();
  otalign::data::save_matrix_csv(dir.file("cost.csv"), cost);
  write_file(dir.file("config.json"), R"({
    "dataset": {"cost": ")" + dir.file("cost.csv") + R"(",
                "ground_truth": ")" + dir.file("gt.txt") + R"("},
    "output": ")" + dir.file("out") + R"("
  })");
  CHECK(run_cli("solve --config " + dir.file("config.json")) == 3);
}

TEST_CASE("gradcheck passes on a small instance") {
  TempDir dir;
  write_file(dir.file("config.json"), R"({
    "generator": {"n": 8, "avg_degree": 3, "edge_noise": 0.1, "feature_noise": 0.2,
                  "normalize_cost": true},
    "problem": {"beta": 1.0, "epsilon": 0.05},
    "output": ")" + dir.file("out") + R"("
  })");
  CHECK(run_cli("gradcheck --config " + dir.file("config.json") + " --seed 4") == 0);
  const json report = json::parse(read_file(dir.file("out") + "/gradcheck.json"));
  CHECK(report["passed"].get<bool>());
  CHECK(report["worst_error"].get<double>() <= 1e-3);
  CHECK(report["utilities"].contains("squared_l2"));
  CHECK(report["utilities"].contains("consistency"));
}

TEST_CASE("run emits one jsonl per strategy-seed pair and a summary") {
  TempDir dir;
  write_file(dir.file("config.json"), small_generator_config(dir.file("out")));
  CHECK(run_cli("run --config " + dir.file("config.json")) == 0);

  for (const char* name : {"impact_l2_neg_seed1.jsonl", "impact_l2_neg_seed2.jsonl",
                           "random_seed1.jsonl", "random_seed2.jsonl"}) {
    CHECK(fs::exists(fs::path(dir.file("out")) / name));
  }
  const std::string summary = read_file(dir.file("out") + "/summary.csv");
  CHECK(summary.find("strategy,seeds,mean_mrr") != std::string::npos);
  CHECK(summary.find("impact_l2_neg,") != std::string::npos);
  CHECK(summary.find("random,") != std::string::npos);

  // identical rerun reproduces the logs except wall-clock fields
  TempDir rerun_dir;
  write_file(rerun_dir.file("config.json"), small_generator_config(rerun_dir.file("out")));
  CHECK(run_cli("run --config " + rerun_dir.file("config.json")) == 0);
  auto strip_clock = [](const std::string& text) {
    std::string filtered;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      auto parsed = json::parse(line);
      parsed.erase("elapsed_ms");
      filtered += parsed.dump() + "\n";
    }
    return filtered;
  };
  CHECK(strip_clock(read_file(dir.file("out") + "/random_seed1.jsonl")) ==
        strip_clock(read_file(rerun_dir.file("out") + "/random_seed1.jsonl")));
}

TEST_CASE("budget zero gives single-row logs with identical metrics across strategies") {
  TempDir dir;
  write_file(dir.file("config.json"), R"({
    "generator": {"n": 30, "avg_degree": 5, "edge_noise": 0.1, "feature_noise": 0.2,
                  "normalize_cost": true},
    "problem": {"beta": 1.0, "epsilon": 0.05},
    "session": {"budget": 0},
    "strategies": ["random", "entropy"],
    "seeds": [5],
    "output": ")" + dir.file("out") + R"("
  })");
  CHECK(run_cli("run --config " + dir.file("config.json")) == 0);
  const std::string random_log = read_file(dir.file("out") + "/random_seed5.jsonl");
  const std::string entropy_log = read_file(dir.file("out") + "/entropy_seed5.jsonl");
  CHECK(std::count(random_log.begin(), random_log.end(), '\n') == 1);
  const auto random_row = json::parse(random_log.substr(0, random_log.find('\n')));
  const auto entropy_row = json::parse(entropy_log.substr(0, entropy_log.find('\n')));
  CHECK(random_row["mrr"] == entropy_row["mrr"]);
}

TEST_CASE("bench writes a timing table with sparse and dense paths") {
  TempDir dir;
  write_file(dir.file("config.json"), R"({
    "generator": {"n": 60, "avg_degree": 6, "edge_noise": 0.1, "feature_noise": 0.0,
                  "normalize_cost": true},
    "problem": {"beta": 1.0, "epsilon": 0.02},
    "sinkhorn": {"max_iterations": 5000, "tolerance": 1e-8},
    "strategies": ["impact_l2_neg"],
    "seeds": [6],
    "bench": {"sizes": [], "repeats": 2, "compare_dense": true},
    "output": ")" + dir.file("out") + R"("
  })");
  CHECK(run_cli("bench --config " + dir.file("config.json")) == 0);
  const std::string table = read_file(dir.file("out") + "/bench.csv");
  CHECK(table.find("n,m,strategy,path,seconds,cg_iterations") != std::string::npos);
  CHECK(table.find(",sparse,") != std::string::npos);
  CHECK(table.find(",dense,") != std::string::npos);
}

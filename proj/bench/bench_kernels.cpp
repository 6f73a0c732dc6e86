// Serial reference vs OpenMP kernels, and the support vs dense adjoint
// operator, on synthetic plans. Run manually:
//   ./build/bench/bench_kernels --benchmark_min_time=0.2

#include "otalign/kernels.hpp"
#include "otalign/sinkhorn.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace otalign;

struct Instance {
  Matrix cost;
  Matrix plan;
  Matrix grad;
  Vector mu, nu, alpha, beta, log_mu, log_nu, v;
  PlanSupport support;
};

Instance make_instance(int n, int m) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Instance inst;
  inst.cost.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) inst.cost(i, j) = unit(rng);
  }
  inst.mu = Vector::Constant(n, 1.0 / n);
  inst.nu = Vector::Constant(m, 1.0 / m);
  inst.log_mu = inst.mu.array().log();
  inst.log_nu = inst.nu.array().log();
  inst.alpha = Vector::Zero(n);
  inst.beta = Vector::Zero(m);
  inst.v = Vector::Ones(n + m);

  // sharpen the plan so the support is genuinely sparse
  AlignmentProblem problem;
  problem.n = n;
  problem.m = m;
  problem.marginals = Marginals{inst.mu, inst.nu};
  problem.cost = inst.cost;
  problem.supervision = SupervisionSet(n, m);
  problem.beta = 0.0;
  problem.epsilon = 0.02;
  auto [coupling, report] = sinkhorn::solve(problem, {2000, 1e-8, true});
  coupling = sinkhorn::sparsify(std::move(coupling), 1e-6);
  inst.plan = coupling.values;
  inst.support = coupling.support;
  inst.grad = 2.0 * inst.plan;
  return inst;
}

void bm_row_update_serial(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::serial::sinkhorn_row_update(inst.cost, inst.beta, 0.05, inst.log_mu, inst.alpha);
    benchmark::DoNotOptimize(inst.alpha.data());
  }
}

void bm_row_update_parallel(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::parallel::sinkhorn_row_update(inst.cost, inst.beta, 0.05, inst.log_mu, inst.alpha);
    benchmark::DoNotOptimize(inst.alpha.data());
  }
}

void bm_col_update_serial(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::serial::sinkhorn_col_update(inst.cost, inst.alpha, 0.05, inst.log_nu, inst.beta);
    benchmark::DoNotOptimize(inst.beta.data());
  }
}

void bm_col_update_parallel(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::parallel::sinkhorn_col_update(inst.cost, inst.alpha, 0.05, inst.log_nu, inst.beta);
    benchmark::DoNotOptimize(inst.beta.data());
  }
}

void bm_support_matvec(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  Vector out;
  for (auto _ : state) {
    kernels::support_matvec(inst.support, inst.mu, inst.nu, inst.v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_dense_matvec(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  Vector out;
  for (auto _ : state) {
    kernels::dense_matvec(inst.plan, inst.mu, inst.nu, inst.v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_score_support(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  Vector scores;
  Vector y_alpha = Vector::Ones(inst.support.n);
  Vector y_beta = Vector::Ones(inst.support.m);
  for (auto _ : state) {
    kernels::score_impacts(inst.support, inst.cost, inst.grad, y_alpha, y_beta, 1.0, 0.05,
                           true, scores);
    benchmark::DoNotOptimize(scores.data());
  }
}

void bm_score_dense(benchmark::State& state) {
  auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  Vector scores;
  Vector y_alpha = Vector::Ones(inst.support.n);
  Vector y_beta = Vector::Ones(inst.support.m);
  for (auto _ : state) {
    kernels::score_impacts_dense(inst.plan, inst.cost, inst.grad, y_alpha, y_beta, 1.0, 0.05,
                                 true, scores);
    benchmark::DoNotOptimize(scores.data());
  }
}

}  // namespace

BENCHMARK(bm_row_update_serial)->Arg(512)->Arg(2048);
BENCHMARK(bm_row_update_parallel)->Arg(512)->Arg(2048);
BENCHMARK(bm_col_update_serial)->Arg(512)->Arg(2048);
BENCHMARK(bm_col_update_parallel)->Arg(512)->Arg(2048);
BENCHMARK(bm_support_matvec)->Arg(512)->Arg(2048);
BENCHMARK(bm_dense_matvec)->Arg(512)->Arg(2048);
BENCHMARK(bm_score_support)->Arg(512)->Arg(2048);
BENCHMARK(bm_score_dense)->Arg(512)->Arg(2048);

BENCHMARK_MAIN();

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otalign/kernels.hpp"
#include "otalign/sinkhorn.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace otalign;

namespace {

AlignmentProblem make_problem(int n, int m, const Matrix& cost, double epsilon,
                              double beta = 1.0) {
  AlignmentProblem p;
  p.n = n;
  p.m = m;
  p.marginals = Marginals::uniform(n, m);
  p.cost = cost;
  p.supervision = SupervisionSet(n, m);
  p.beta = beta;
  p.epsilon = epsilon;
  return p;
}

Matrix random_cost(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) cost(i, j) = unit(rng);
  }
  return cost;
}

// Independent oracle: KL-mirror descent on <C,T> + eps*sum T(log T - 1),
// re-projected onto the transport polytope by plain alternating row/column
// normalization after every step, iterated until the plan stops moving.
Matrix mirror_descent_oracle(const Matrix& cost, const Vector& mu, const Vector& nu,
                             double epsilon) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  Matrix plan = mu * nu.transpose();  // independent coupling start
  const double learning_rate = 0.5 / epsilon;
  for (int outer = 0; outer < 200000; ++outer) {
    Matrix next = plan;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double gradient = cost(i, j) + epsilon * std::log(plan(i, j));
        next(i, j) = plan(i, j) * std::exp(-learning_rate * gradient);
      }
    }
    for (int projection = 0; projection < 500; ++projection) {
      for (int i = 0; i < n; ++i) next.row(i) *= mu[i] / next.row(i).sum();
      for (int j = 0; j < m; ++j) next.col(j) *= nu[j] / next.col(j).sum();
      double row_err = 0.0;
      for (int i = 0; i < n; ++i) row_err += std::abs(next.row(i).sum() - mu[i]);
      if (row_err < 1e-15) break;
    }
    const double moved = (next - plan).cwiseAbs().maxCoeff();
    plan = next;
    if (moved < 1e-15) break;
  }
  return plan;
}

}  // namespace

TEST_CASE("build_supervised_cost scales only the supervised entries") {
  const Matrix cost = random_cost(4, 6, 1);

  SUBCASE("empty supervision leaves the cost untouched") {
    const SupervisionSet empty(4, 6);
    CHECK((sinkhorn::build_supervised_cost(cost, empty, 1.0) - cost).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SUBCASE("beta=1 zeroes a supervised entry") {
    Matrix with_value = cost;
    with_value(2, 5) = 0.7;
    SupervisionSet s(4, 6);
    s.add(2, 5);
    const Matrix supervised = sinkhorn::build_supervised_cost(with_value, s, 1.0);
    CHECK(supervised(2, 5) == 0.0);
    CHECK(supervised(1, 3) == with_value(1, 3));
    CHECK((supervised.array() >= 0.0).all());
  }

  SUBCASE("beta=0 changes nothing regardless of supervision") {
    SupervisionSet s(4, 6);
    s.add(0, 0);
    s.add(3, 2);
    CHECK((sinkhorn::build_supervised_cost(cost, s, 0.0) - cost).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("constant cost gives the independent coupling") {
  SUBCASE("2x2 zero cost") {
    const AlignmentProblem p = make_problem(2, 2, Matrix::Zero(2, 2), 0.3);
    auto [coupling, report] = sinkhorn::solve(p, {1000, 1e-12, true});
    CHECK(report.converged);
    CHECK((coupling.values.array() - 0.25).abs().maxCoeff() < 1e-10);
  }

  SUBCASE("any constant, both modes, rectangle") {
    const Matrix cost = Matrix::Constant(3, 5, 0.8);
    for (bool log_domain : {true, false}) {
      const AlignmentProblem p = make_problem(3, 5, cost, 0.2);
      auto [coupling, report] = sinkhorn::solve(p, {1000, 1e-12, log_domain});
      CHECK(report.converged);
      const Matrix product = p.marginals.mu * p.marginals.nu.transpose();
      CHECK((coupling.values - product).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("huge epsilon collapses to the independent coupling") {
  // the gap shrinks like O(max C / eps) relative to the product coupling
  const Matrix cost = random_cost(4, 4, 2);
  const Matrix product = Marginals::uniform(4, 4).mu * Marginals::uniform(4, 4).nu.transpose();

  const AlignmentProblem p100 = make_problem(4, 4, cost, 100.0 * cost.maxCoeff());
  auto [c100, r100] = sinkhorn::solve(p100, {2000, 1e-10, true});
  CHECK(r100.converged);
  const double gap100 = (c100.values - product).cwiseAbs().maxCoeff();
  CHECK(gap100 < 0.01 * product.maxCoeff());

  const AlignmentProblem p_huge = make_problem(4, 4, cost, 1e8 * cost.maxCoeff());
  auto [c_huge, r_huge] = sinkhorn::solve(p_huge, {2000, 1e-12, true});
  CHECK(r_huge.converged);
  CHECK((c_huge.values - product).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((c_huge.values - product).cwiseAbs().maxCoeff() < gap100);
}

TEST_CASE("identity cost at eps=0.1 matches the mirror-descent oracle") {
  Matrix cost = Matrix::Ones(3, 3);
  cost.diagonal().setZero();
  const AlignmentProblem p = make_problem(3, 3, cost, 0.1);

  const Matrix oracle =
      mirror_descent_oracle(cost, p.marginals.mu, p.marginals.nu, p.epsilon);

  // symmetry argument: diagonal entries equal a, off-diagonal equal a*e^{-1/eps},
  // with a + 2b = 1/3
  const double ratio = std::exp(-1.0 / p.epsilon);
  const double a = (1.0 / 3.0) / (1.0 + 2.0 * ratio);
  CHECK(oracle(0, 0) == doctest::Approx(a).epsilon(1e-9));
  CHECK(oracle(0, 1) == doctest::Approx(a * ratio).epsilon(1e-6));

  auto [coupling, report] = sinkhorn::solve(p, {20000, 1e-13, true});
  CHECK(report.converged);
  CHECK((coupling.values - oracle).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(coupling.values(0, 0) == doctest::Approx(coupling.values(1, 1)).epsilon(1e-10));
  CHECK(coupling.values(0, 0) == doctest::Approx(coupling.values(2, 2)).epsilon(1e-10));
  CHECK(coupling.values(0, 0) > coupling.values(0, 1));
}

TEST_CASE("marginal conservation and dual consistency after converged solves") {
  for (std::uint64_t seed : {5, 6, 7}) {
    const Matrix cost = random_cost(7, 9, seed);
    const AlignmentProblem p = make_problem(7, 9, cost, 0.08);
    auto [coupling, report] = sinkhorn::solve(p, {20000, 1e-9, true});
    REQUIRE(report.converged);
    CHECK(kernels::marginal_violation(coupling.values, p.marginals.mu, p.marginals.nu) <=
          1e-9);
    CHECK(coupling.marginal_violation <= 1e-9);

    // eps*log T + C - alpha_i - beta_j = 0 for entries above 1e-12
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 9; ++j) {
        if (coupling.values(i, j) <= 1e-12) continue;
        const double residual = p.epsilon * std::log(coupling.values(i, j)) + cost(i, j) -
                                coupling.alpha[i] - coupling.beta[j];
        CHECK(std::abs(residual) < 1e-6);
      }
    }
  }
}

TEST_CASE("log-domain and plain-domain agree where both run") {
  const Matrix cost = random_cost(6, 5, 11);
  const AlignmentProblem p = make_problem(6, 5, cost, 0.15);
  auto [log_coupling, log_report] = sinkhorn::solve(p, {20000, 1e-11, true});
  auto [plain_coupling, plain_report] = sinkhorn::solve(p, {20000, 1e-11, false});
  REQUIRE(log_report.converged);
  REQUIRE(plain_report.converged);
  CHECK((log_coupling.values - plain_coupling.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("plain mode underflow raises a numerical failure") {
  Matrix cost = Matrix::Zero(3, 3);
  cost(0, 1) = 1e6;  // exp(-1e6/1e-3) underflows to zero
  const AlignmentProblem p = make_problem(3, 3, cost, 1e-3);
  try {
    sinkhorn::solve(p, {100, 1e-9, false});
    FAIL("expected numerical failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalOverflow);
  }
  // log domain handles the same instance
  CHECK_NOTHROW(sinkhorn::solve(p, {100, 1e-9, true}));
}

TEST_CASE("non-convergence is a soft failure with a usable iterate") {
  const Matrix cost = random_cost(8, 8, 13);
  const AlignmentProblem p = make_problem(8, 8, cost, 0.01);
  auto [coupling, report] = sinkhorn::solve(p, {2, 1e-13, true});
  CHECK_FALSE(report.converged);
  CHECK(report.iterations_used == 2);
  CHECK(report.final_violation > 1e-13);
  CHECK(coupling.values.allFinite());
  CHECK(coupling.marginal_violation == report.final_violation);
}

TEST_CASE("dual objective is non-decreasing across iterations") {
  // block-coordinate ascent on the dual; run the updates manually
  for (std::uint64_t seed : {17, 18}) {
    const Matrix cost = random_cost(6, 7, seed);
    const Vector mu = Vector::Constant(6, 1.0 / 6);
    const Vector nu = Vector::Constant(7, 1.0 / 7);
    const Vector log_mu = mu.array().log();
    const Vector log_nu = nu.array().log();
    const double eps = 0.05;
    Vector alpha = Vector::Zero(6);
    Vector beta = Vector::Zero(7);
    double previous = sinkhorn::dual_objective(cost, alpha, beta, mu, nu, eps);
    for (int it = 0; it < 300; ++it) {
      kernels::sinkhorn_row_update(cost, beta, eps, log_mu, alpha);
      kernels::sinkhorn_col_update(cost, alpha, eps, log_nu, beta);
      const double current = sinkhorn::dual_objective(cost, alpha, beta, mu, nu, eps);
      CHECK(current >= previous - 1e-12);
      previous = current;
    }
  }
}

TEST_CASE("sparsify keeps the threshold set plus per-row argmaxes") {
  SUBCASE("permutation-like plan keeps one entry per row") {
    Matrix plan = Matrix::Constant(5, 5, 1e-12);
    for (int i = 0; i < 5; ++i) plan(i, (i + 2) % 5) = 0.2;
    Coupling coupling;
    coupling.values = plan;
    coupling = sinkhorn::sparsify(std::move(coupling), 1e-6);
    CHECK(coupling.support.nnz() == 5);
  }

  SUBCASE("uniform plan keeps everything") {
    Coupling coupling;
    coupling.values = Matrix::Constant(4, 6, 1.0 / 24);
    coupling = sinkhorn::sparsify(std::move(coupling), 1e-6);
    CHECK(coupling.support.nnz() == 24);
  }

  SUBCASE("support equals an exhaustive scan on a solved instance") {
    Matrix cost = Matrix::Ones(3, 3);
    cost.diagonal().setZero();
    const AlignmentProblem p = make_problem(3, 3, cost, 0.1);
    auto [coupling, report] = sinkhorn::solve(p, {20000, 1e-12, true});
    coupling = sinkhorn::sparsify(std::move(coupling), 1e-3);

    const double threshold = 1e-3 * coupling.values.maxCoeff();
    std::set<std::pair<int, int>> expected;
    for (int i = 0; i < 3; ++i) {
      int argmax = 0;
      for (int j = 1; j < 3; ++j) {
        if (coupling.values(i, j) > coupling.values(i, argmax)) argmax = j;
      }
      for (int j = 0; j < 3; ++j) {
        if (coupling.values(i, j) >= threshold || j == argmax) expected.insert({i, j});
      }
    }
    std::set<std::pair<int, int>> actual;
    for (int i = 0; i < 3; ++i) {
      for (int k = coupling.support.row_ptr[i]; k < coupling.support.row_ptr[i + 1]; ++k) {
        actual.insert({i, coupling.support.col_idx[k]});
      }
    }
    CHECK(actual == expected);
  }

  SUBCASE("row-compressed and column-compressed views hold the same entries") {
    const Matrix cost = random_cost(9, 4, 23);
    const AlignmentProblem p = make_problem(9, 4, cost, 0.05);
    auto [coupling, report] = sinkhorn::solve(p, {20000, 1e-10, true});
    coupling = sinkhorn::sparsify(std::move(coupling), 1e-4);
    double row_total = 0.0, col_total = 0.0;
    for (double v : coupling.support.value) row_total += v;
    for (double v : coupling.support.value_by_col) col_total += v;
    CHECK(row_total == doctest::Approx(col_total).epsilon(1e-14));
    CHECK(coupling.support.retained_mass() == doctest::Approx(row_total));
  }
}

TEST_CASE("solve rejects a broken config") {
  const AlignmentProblem p = make_problem(2, 2, Matrix::Zero(2, 2), 0.1);
  CHECK_THROWS_AS(sinkhorn::solve(p, {0, 1e-9, true}), Error);
  CHECK_THROWS_AS(sinkhorn::solve(p, {10, -1.0, true}), Error);
  Coupling c;
  c.values = Matrix::Constant(2, 2, 0.25);
  CHECK_THROWS_AS(sinkhorn::sparsify(std::move(c), 1.5), Error);
}

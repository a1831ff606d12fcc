#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pgw/oracles.hpp"
#include "pgw/transport_lp.hpp"

using namespace pgw;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

// Dense sweep over the two free coordinates of the 3x2 transport polytope
// with marginals (1/3,1/3,1/3), (1/2,1/2). Independent of the simplex code.
double brute_force_3x2(const Eigen::MatrixXd& cost) {
  double best = std::numeric_limits<double>::infinity();
  const int steps = 600;
  for (int a = 0; a <= steps; ++a) {
    const double g11 = (1.0 / 3.0) * a / steps;
    for (int b = 0; b <= steps; ++b) {
      const double g21 = (1.0 / 3.0) * b / steps;
      const double g12 = 1.0 / 3.0 - g11;
      const double g22 = 1.0 / 3.0 - g21;
      const double g31 = 0.5 - g11 - g21;
      const double g32 = 1.0 / 3.0 - g31;
      if (g31 < 0 || g32 < 0) continue;
      const double value = cost(0, 0) * g11 + cost(0, 1) * g12 +
                           cost(1, 0) * g21 + cost(1, 1) * g22 +
                           cost(2, 0) * g31 + cost(2, 1) * g32;
      best = std::min(best, value);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("balanced OT finds zero-cost matchings") {
  Eigen::MatrixXd cost(2, 2);
  cost << 0, 1, 1, 0;
  const auto plan = solve_ot(cost, vec({0.5, 0.5}), vec({0.5, 0.5}));
  CHECK(plan.objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plan.matrix(0, 0) == doctest::Approx(0.5));
  CHECK(plan.matrix(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("balanced OT 1x1") {
  Eigen::MatrixXd cost(1, 1);
  cost << 1;
  const auto plan = solve_ot(cost, vec({1}), vec({1}));
  CHECK(plan.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(plan.objective == doctest::Approx(1.0));
}

TEST_CASE("balanced OT on the 3x2 polytope") {
  Eigen::MatrixXd cost(3, 2);
  cost << 0, 2, 2, 0, 1, 1;
  const Eigen::VectorXd p = vec({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const Eigen::VectorXd q = vec({0.5, 0.5});
  const auto plan = solve_ot(cost, p, q);

  // row 3 pays 1 per unit wherever it goes; rows 1 and 2 can ride for free
  CHECK(plan.objective == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(plan.objective <= brute_force_3x2(cost) + 1e-9);
  CHECK(plan.matrix(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(plan.matrix(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(plan.matrix(2, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(plan.matrix(2, 1) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("balanced OT marginal checks") {
  Eigen::MatrixXd cost(2, 2);
  cost << 0, 1, 1, 0;
  CHECK_THROWS_AS(solve_ot(cost, vec({0.6, 0.5}), vec({0.5, 0.5})), InputError);
  cost(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_ot(cost, vec({0.5, 0.5}), vec({0.5, 0.5})), InputError);
}

TEST_CASE("partial OT transports nothing at positive cost") {
  Eigen::MatrixXd cost(1, 1);
  cost << 2;
  const auto plan = solve_partial_ot(cost, vec({1}), vec({0.3}));
  CHECK(plan.objective == doctest::Approx(0.0));
  CHECK(plan.matrix(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("partial OT fills negative cells") {
  Eigen::MatrixXd cost(1, 1);
  cost << -2;
  const auto plan = solve_partial_ot(cost, vec({1}), vec({0.3}));
  CHECK(plan.matrix(0, 0) == doctest::Approx(0.3));
  CHECK(plan.objective == doctest::Approx(-0.6));

  Eigen::MatrixXd mixed(2, 2);
  mixed << -1, 3, 3, -1;
  const auto diag = solve_partial_ot(mixed, vec({0.5, 0.5}), vec({0.5, 0.5}));
  CHECK(diag.objective == doctest::Approx(-1.0));
  CHECK(diag.matrix(0, 0) == doctest::Approx(0.5));
  CHECK(diag.matrix(1, 1) == doctest::Approx(0.5));
  CHECK(diag.matrix(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("partial OT objective is never positive") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    Eigen::MatrixXd cost(3, 2);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost(i) = c(rng);
    Eigen::VectorXd p(3), q(2);
    for (Eigen::Index i = 0; i < 3; ++i) p[i] = w(rng);
    for (Eigen::Index i = 0; i < 2; ++i) q[i] = w(rng);
    const auto plan = solve_partial_ot(cost, p, q);
    CHECK(plan.objective <= 1e-12);
    // Gamma_<= feasibility
    CHECK(((plan.row_marginal - p).array() <= 1e-9).all());
    CHECK(((plan.col_marginal - q).array() <= 1e-9).all());
    CHECK(plan.matrix.minCoeff() >= 0.0);
    // reported objective matches the plan
    CHECK(plan.objective ==
          doctest::Approx((cost.array() * plan.matrix.array()).sum())
              .epsilon(1e-12));
  }
}

TEST_CASE("partial OT matches the grid oracle on quarter-mass instances") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_int_distribution<int> mass_choice(1, 2);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 1 + rep % 3;        // 1..3
    const int m = (n == 3) ? 2 : 1 + (rep / 3) % 2;
    Eigen::MatrixXd cost(n, m);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost(i) = c(rng);
    Eigen::VectorXd p(n), q(m);
    for (int i = 0; i < n; ++i) p[i] = 0.25 * mass_choice(rng);
    for (int i = 0; i < m; ++i) q[i] = 0.25 * mass_choice(rng);

    const auto lp = solve_partial_ot(cost, p, q);
    const auto oracle = partial_ot_grid_oracle(cost, p, q, 8);
    // masses are multiples of 1/4, so the optimal vertex lies on the grid
    CHECK(lp.objective == doctest::Approx(oracle.value).epsilon(1e-9));
  }
}

TEST_CASE("degenerate marginals give the zero plan") {
  Eigen::MatrixXd cost(2, 2);
  cost << -1, -1, -1, -1;
  const auto plan = solve_partial_ot(cost, vec({0, 0}), vec({1, 1}));
  CHECK(plan.total == 0.0);
  CHECK(plan.objective == 0.0);
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  Eigen::MatrixXd cost(4, 5);
  for (Eigen::Index i = 0; i < cost.size(); ++i) cost(i) = c(rng);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 0.25);
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(5, 0.2);
  const auto a = solve_ot(cost, p, q);
  const auto b = solve_ot(cost, p, q);
  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0);
}

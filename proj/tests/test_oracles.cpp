#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pgw/fw_solvers.hpp"
#include "pgw/oracles.hpp"

using namespace pgw;

namespace {

GmSpace random_cloud(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Eigen::MatrixXd pts(n, 2);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = coord(rng);
  return GmSpace::from_points(pts, Eigen::VectorXd::Constant(n, 1.0 / n),
                              GaugeKind::SquaredEuclidean);
}

}  // namespace

TEST_CASE("permutation oracle on identical spaces") {
  std::mt19937_64 rng(3);
  const GmSpace a = random_cloud(4, rng);
  const auto result = gw_permutation_oracle(a, a);
  CHECK(result.value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(result.enumerated_count == 24);
  CHECK(result.argmin_description == "perm=[0,1,2,3]");
}

TEST_CASE("permutation oracle on the two-point gauges") {
  Eigen::MatrixXd ga(2, 2), gb(2, 2);
  ga << 0, 1, 1, 0;
  gb << 0, 2, 2, 0;
  const auto a = GmSpace::from_gauge(ga, Eigen::VectorXd::Constant(2, 0.5));
  const auto b = GmSpace::from_gauge(gb, Eigen::VectorXd::Constant(2, 0.5));
  const auto result = gw_permutation_oracle(a, b);
  CHECK(result.value == doctest::Approx(0.5));
  CHECK(result.enumerated_count == 2);
}

TEST_CASE("permutation oracle guards") {
  std::mt19937_64 rng(5);
  const GmSpace small = random_cloud(3, rng);
  const GmSpace big = random_cloud(9, rng);
  CHECK_THROWS_AS(gw_permutation_oracle(big, big), InputError);
  const GmSpace other = random_cloud(4, rng);
  CHECK_THROWS_AS(gw_permutation_oracle(small, other), InputError);

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd uneven(2);
  uneven << 0.3, 0.7;
  CHECK_THROWS_AS(
      gw_permutation_oracle(GmSpace::from_gauge(g, uneven),
                            GmSpace::from_gauge(g, uneven)),
      InputError);
}

TEST_CASE("oracle lower-bounds the solver on random n=3 instances") {
  std::mt19937_64 rng(7);
  FwConfig cfg;
  cfg.restarts = 6;
  for (int rep = 0; rep < 10; ++rep) {
    const GmSpace a = random_cloud(3, rng);
    const GmSpace b = random_cloud(3, rng);
    const auto oracle = gw_permutation_oracle(a, b);
    const auto [plan, report] = solve_gw(a, b, cfg);
    CHECK(report.objective >= oracle.value - 1e-9);
  }
}

TEST_CASE("random feasible plans satisfy the inequalities") {
  Eigen::VectorXd p(3), q(2);
  p << 0.4, 0.3, 0.3;
  q << 0.5, 0.2;
  const auto plans = random_feasible_plans(p, q, 50, 99);
  CHECK(plans.size() == 50);
  for (const auto& plan : plans) {
    CHECK(plan.matrix.minCoeff() >= 0.0);
    CHECK(((plan.row_marginal - p).array() <= 1e-12).all());
    CHECK(((plan.col_marginal - q).array() <= 1e-12).all());
  }

  // deterministic per seed
  const auto again = random_feasible_plans(p, q, 50, 99);
  for (std::size_t k = 0; k < plans.size(); ++k)
    CHECK((plans[k].matrix - again[k].matrix).cwiseAbs().maxCoeff() == 0.0);

  // convex mixing stays feasible
  const Eigen::MatrixXd mix = 0.5 * plans[0].matrix + 0.5 * plans[1].matrix;
  CHECK(((mix.rowwise().sum() - p).array() <= 1e-12).all());

  // scalar case
  const auto scalars =
      random_feasible_plans(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1),
                            3, 1);
  for (const auto& plan : scalars) {
    CHECK(plan.matrix(0, 0) >= 0.0);
    CHECK(plan.matrix(0, 0) <= 1.0);
  }
}

TEST_CASE("grid oracle scalar case") {
  Eigen::MatrixXd cost(1, 1);
  cost << -2;
  Eigen::VectorXd p(1), q(1);
  p << 1;
  q << 0.3;
  const auto result = partial_ot_grid_oracle(cost, p, q, 32);
  CHECK(result.value == doctest::Approx(-0.6).epsilon(0.02));
  CHECK(result.enumerated_count == 33);

  cost << 2;
  CHECK(partial_ot_grid_oracle(cost, p, q, 32).value == 0.0);
}

TEST_CASE("grid oracle guards") {
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(partial_ot_grid_oracle(cost, ones, ones, 8), InputError);
  Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(2, 2);
  const Eigen::VectorXd two = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(partial_ot_grid_oracle(ok, two, two, 64), InputError);
}

TEST_CASE("grid oracle upper-bounds the LP on random 2x2 instances") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_real_distribution<double> w(0.2, 1.0);
  for (int rep = 0; rep < 15; ++rep) {
    Eigen::MatrixXd cost(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) cost(i) = c(rng);
    Eigen::VectorXd p(2), q(2);
    p << w(rng), w(rng);
    q << w(rng), w(rng);
    const auto lp = solve_partial_ot(cost, p, q);
    const auto oracle = partial_ot_grid_oracle(cost, p, q, 16);
    CHECK(oracle.value >= lp.objective - 1e-12);
    CHECK(oracle.value <= lp.objective + 4.0 * 2.0 / 16.0);
  }
}

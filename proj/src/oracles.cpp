#include "pgw/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace pgw {

OracleResult gw_permutation_oracle(const GmSpace& a, const GmSpace& b) {
  const Eigen::Index n = a.size();
  if (n != b.size())
    throw InputError("permutation oracle requires equally sized spaces");
  if (n > 8) throw InputError("permutation oracle limited to n <= 8");
  const double unit = a.mass()[0];
  if ((a.mass().array() - unit).abs().maxCoeff() > 1e-12 ||
      (b.mass().array() - unit).abs().maxCoeff() > 1e-12)
    throw InputError("permutation oracle requires uniform equal masses");

  const Eigen::MatrixXd& ga = a.gauge();
  const Eigen::MatrixXd& gb = b.gauge();
  const double w2 = unit * unit;

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::vector<Eigen::Index> best = perm;
  double best_value = std::numeric_limits<double>::infinity();
  std::int64_t count = 0;
  do {
    double value = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d = ga(i, j) - gb(perm[static_cast<std::size_t>(i)],
                                       perm[static_cast<std::size_t>(j)]);
        value += d * d;
      }
    value *= w2;
    ++count;
    if (value < best_value) {
      best_value = value;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::ostringstream desc;
  desc << "perm=[";
  for (std::size_t i = 0; i < best.size(); ++i)
    desc << (i ? "," : "") << best[i];
  desc << "]";
  return {best_value, desc.str(), count};
}

namespace {

Eigen::MatrixXd random_scaled_vertex(const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& q,
                                     std::mt19937_64& rng) {
  const Eigen::Index n = p.size(), m = q.size();
  const double t = std::min(p.sum(), q.sum());
  if (t <= 0.0) return Eigen::MatrixXd::Zero(n, m);
  Eigen::VectorXd pr = p * (t / p.sum());
  Eigen::VectorXd qr = q * (t / q.sum());

  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(m));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n, m);
  std::size_t ri = 0, ci = 0;
  while (ri < rows.size() && ci < cols.size()) {
    const Eigen::Index i = rows[ri], j = cols[ci];
    const double amount = std::min(pr[i], qr[j]);
    plan(i, j) += amount;
    pr[i] -= amount;
    qr[j] -= amount;
    if (pr[i] <= 0.0) ++ri;
    if (qr[j] <= 0.0) ++ci;
  }
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  return plan * scale(rng);
}

}  // namespace

std::vector<TransportPlan> random_feasible_plans(const Eigen::VectorXd& p,
                                                 const Eigen::VectorXd& q,
                                                 int count,
                                                 std::uint64_t seed) {
  if (count < 1) throw InputError("count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  std::vector<TransportPlan> plans;
  plans.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const Eigen::MatrixXd va = random_scaled_vertex(p, q, rng);
    const Eigen::MatrixXd vb = random_scaled_vertex(p, q, rng);
    const double t = mix(rng);
    plans.push_back(TransportPlan::from_matrix(t * va + (1.0 - t) * vb));
  }
  return plans;
}

OracleResult partial_ot_grid_oracle(const Eigen::MatrixXd& cost,
                                    const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& q, int grid_steps) {
  const Eigen::Index n = p.size(), m = q.size();
  if (cost.rows() != n || cost.cols() != m)
    throw InputError("cost/marginal dimension mismatch");
  if (n * m > 6) throw InputError("grid oracle limited to n*m <= 6");
  if (grid_steps < 1 || grid_steps > 32)
    throw InputError("grid_steps must be in [1, 32]");

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, m);
  Eigen::VectorXd row_left = p, col_left = q;
  double best_value = 0.0;  // gamma = 0 is always feasible
  Eigen::MatrixXd best_gamma = gamma;
  std::int64_t count = 0;

  // depth-first over cells; each cell ranges over an even grid of its
  // remaining-budget cap, so every visited plan is feasible
  auto recurse = [&](auto&& self, Eigen::Index cell, double value) -> void {
    if (cell == n * m) {
      ++count;
      if (value < best_value) {
        best_value = value;
        best_gamma = gamma;
      }
      return;
    }
    const Eigen::Index i = cell / m, j = cell % m;
    const double cap = std::min(row_left[i], col_left[j]);
    for (int step = 0; step <= grid_steps; ++step) {
      const double v = cap * static_cast<double>(step) /
                       static_cast<double>(grid_steps);
      gamma(i, j) = v;
      row_left[i] -= v;
      col_left[j] -= v;
      self(self, cell + 1, value + cost(i, j) * v);
      row_left[i] += v;
      col_left[j] += v;
      if (cap <= 0.0) break;
    }
    gamma(i, j) = 0.0;
  };
  recurse(recurse, 0, 0.0);

  std::ostringstream desc;
  desc << "grid argmin, mass " << best_gamma.sum();
  return {best_value, desc.str(), count};
}

}  // namespace pgw

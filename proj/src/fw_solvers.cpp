#include "pgw/fw_solvers.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

namespace pgw {

namespace {

std::atomic<std::uint64_t> g_solver_calls{0};

void check_dims(const Eigen::MatrixXd& plan, const GmSpace& a,
                const GmSpace& b) {
  if (plan.rows() != a.size() || plan.cols() != b.size())
    throw InputError("plan dimensions do not match the spaces");
}

// <(gA - gB)^2, gamma (x) delta> for arbitrary matrices gamma, delta of
// matching shape; the bilinear form behind objective, gradient and line
// search. Cost O(n^2 m + n m^2).
double gw_bilinear(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& delta,
                   const GmSpace& a, const GmSpace& b) {
  const Eigen::VectorXd rg = gamma.rowwise().sum();
  const Eigen::VectorXd cg = gamma.colwise().sum();
  const Eigen::VectorXd rd = delta.rowwise().sum();
  const Eigen::VectorXd cd = delta.colwise().sum();
  const double c1 = rd.dot(a.gauge().cwiseProduct(a.gauge()) * rg);
  const double c2 = cd.dot(b.gauge().cwiseProduct(b.gauge()) * cg);
  const double cross = (delta.array() * (a.gauge() * gamma * b.gauge()).array()).sum();
  return c1 + c2 - 2.0 * cross;
}

struct FwProblem {
  const GmSpace& a;
  const GmSpace& b;
  std::optional<double> lambda;  // engaged => partial problem over Gamma_<=

  double objective(const Eigen::MatrixXd& plan) const {
    double value = gw_bilinear(plan, plan, a, b);
    if (lambda) {
      const double t = plan.sum();
      const double pa = a.total_mass(), pb = b.total_mass();
      value += *lambda * (pa * pa - t * t) + *lambda * (pb * pb - t * t);
    }
    return value;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& plan) const {
    return lambda ? pgw_gradient(plan, a, b, *lambda)
                  : gw_gradient(plan, a, b);
  }

  TransportPlan linear_minimizer(const Eigen::MatrixXd& grad) const {
    return lambda ? solve_partial_ot(grad, a.mass(), b.mass())
                  : solve_ot(grad, a.mass(), b.mass());
  }
};

// Deterministic ordering of the two spaces so that solve(A,B) and solve(B,A)
// run the identical computation up to a transpose.
bool should_swap(const GmSpace& a, const GmSpace& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  if (a.total_mass() != b.total_mass()) return a.total_mass() > b.total_mass();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a.mass()[i] != b.mass()[i]) return a.mass()[i] > b.mass()[i];
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a.gauge()(i, j) != b.gauge()(i, j))
        return a.gauge()(i, j) > b.gauge()(i, j);
  }
  return false;
}

// Random vertex of Gamma(p', q') with p' = p, q' = q scaled to the common
// total min(|p|, |q|): northwest-corner allocation under a random
// row/column shuffle.
Eigen::MatrixXd random_vertex(const Eigen::VectorXd& p,
                              const Eigen::VectorXd& q, std::mt19937_64& rng) {
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
    if (qr[j] <= 0.0 && ci < cols.size()) ++ci;
  }
  return plan;
}

Eigen::MatrixXd initial_plan(const FwProblem& prob, FwInit init,
                             std::uint64_t seed) {
  const Eigen::VectorXd& p = prob.a.mass();
  const Eigen::VectorXd& q = prob.b.mass();
  switch (init) {
    case FwInit::Product:
      return p * q.transpose() / std::max(p.sum(), q.sum());
    case FwInit::Identity: {
      if (p.size() != q.size())
        throw InputError("identity init requires equally sized spaces");
      if (!prob.lambda && (p - q).cwiseAbs().maxCoeff() > 1e-9)
        throw InputError("identity init for balanced GW requires equal masses");
      return Eigen::MatrixXd(p.cwiseMin(q).asDiagonal());
    }
    case FwInit::RandomFeasible: {
      std::mt19937_64 rng(seed);
      return random_vertex(p, q, rng);
    }
  }
  throw InputError("unknown initialization");
}

std::pair<TransportPlan, SolveReport> fw_run(const FwProblem& prob,
                                             Eigen::MatrixXd plan,
                                             const FwConfig& cfg) {
  SolveReport report;
  report.lambda = prob.lambda.value_or(0.0);
  double value = prob.objective(plan);
  report.objective_trace.push_back(value);
  report.termination = FwTermination::MaxIters;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Eigen::MatrixXd grad = prob.gradient(plan);
    const TransportPlan vertex = prob.linear_minimizer(grad);
    const Eigen::MatrixXd direction = vertex.matrix - plan;
    const double step =
        fw_line_search(plan, direction, prob.a, prob.b, prob.lambda);
    if (step > 0.0) plan += step * direction;
    const double next = prob.objective(plan);
    report.step_sizes.push_back(step);
    report.objective_trace.push_back(next);
    report.iterations = iter + 1;
    if (std::abs(value - next) <= cfg.rel_tol * std::max(1.0, std::abs(value))) {
      report.termination = FwTermination::Converged;
      value = next;
      break;
    }
    value = next;
  }
  report.objective = value;
  return {TransportPlan::from_matrix(std::move(plan), value),
          std::move(report)};
}

std::pair<TransportPlan, SolveReport> fw_solve(const FwProblem& prob,
                                               const FwConfig& cfg,
                                               const Eigen::MatrixXd* explicit_init) {
  if (cfg.max_iters < 1 || cfg.restarts < 1 || !(cfg.rel_tol > 0.0))
    throw InputError("invalid Frank-Wolfe configuration");
  g_solver_calls.fetch_add(1, std::memory_order_relaxed);

  std::optional<std::pair<TransportPlan, SolveReport>> best;
  const int restarts = explicit_init ? 1 : cfg.restarts;
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd start =
        explicit_init
            ? *explicit_init
            : initial_plan(prob, r == 0 ? cfg.init : FwInit::RandomFeasible,
                           cfg.seed + static_cast<std::uint64_t>(r));
    auto run = fw_run(prob, std::move(start), cfg);
    if (!std::isfinite(run.second.objective))
      throw NumericalError("Frank-Wolfe produced a non-finite objective");
    if (!best || run.second.objective < best->second.objective)
      best = std::move(run);
  }

  // The empty plan is always feasible for the partial problem; never report
  // anything worse than destroying all mass.
  if (prob.lambda) {
    const double pa = prob.a.total_mass(), pb = prob.b.total_mass();
    const double empty_value = *prob.lambda * (pa * pa + pb * pb);
    if (empty_value < best->second.objective) {
      SolveReport report;
      report.lambda = *prob.lambda;
      report.objective = empty_value;
      report.objective_trace = {empty_value};
      report.termination = FwTermination::Converged;
      best = {TransportPlan::from_matrix(
                  Eigen::MatrixXd::Zero(prob.a.size(), prob.b.size()),
                  empty_value),
              std::move(report)};
    }
  }
  return std::move(*best);
}

std::pair<TransportPlan, SolveReport> transpose_result(
    std::pair<TransportPlan, SolveReport> result) {
  result.first = TransportPlan::from_matrix(result.first.matrix.transpose(),
                                            result.first.objective);
  return result;
}

}  // namespace

double gw_objective(const Eigen::MatrixXd& plan, const GmSpace& a,
                    const GmSpace& b) {
  check_dims(plan, a, b);
  return gw_bilinear(plan, plan, a, b);
}

double pgw_objective(const Eigen::MatrixXd& plan, const GmSpace& a,
                     const GmSpace& b, double lambda) {
  check_dims(plan, a, b);
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  const double tol = 1e-9 * std::max(1.0, plan.sum());
  if (((plan.rowwise().sum() - a.mass()).array() > tol).any() ||
      ((plan.colwise().sum().transpose() - b.mass()).array() > tol).any() ||
      (plan.array() < -tol).any())
    throw InputError("plan is infeasible for Gamma_<=(p, q)");
  const double t = plan.sum();
  const double pa = a.total_mass(), pb = b.total_mass();
  return gw_bilinear(plan, plan, a, b) + lambda * (pa * pa - t * t) +
         lambda * (pb * pb - t * t);
}

Eigen::MatrixXd gw_gradient(const Eigen::MatrixXd& plan, const GmSpace& a,
                            const GmSpace& b) {
  check_dims(plan, a, b);
  const Eigen::VectorXd r = plan.rowwise().sum();
  const Eigen::VectorXd c = plan.colwise().sum();
  const Eigen::VectorXd t1 = a.gauge().cwiseProduct(a.gauge()) * r;
  const Eigen::VectorXd t2 = b.gauge().cwiseProduct(b.gauge()) * c;
  Eigen::MatrixXd grad = -2.0 * (a.gauge() * plan * b.gauge());
  grad.colwise() += t1;
  grad.rowwise() += t2.transpose();
  return 2.0 * grad;
}

Eigen::MatrixXd pgw_gradient(const Eigen::MatrixXd& plan, const GmSpace& a,
                             const GmSpace& b, double lambda) {
  Eigen::MatrixXd grad = gw_gradient(plan, a, b);
  grad.array() -= 4.0 * lambda * plan.sum();
  return grad;
}

double fw_line_search(const Eigen::MatrixXd& plan,
                      const Eigen::MatrixXd& direction, const GmSpace& a,
                      const GmSpace& b, std::optional<double> lambda) {
  check_dims(plan, a, b);
  if (direction.rows() != plan.rows() || direction.cols() != plan.cols())
    throw InputError("direction dimensions do not match the plan");

  double quad = gw_bilinear(direction, direction, a, b);
  double lin = 2.0 * gw_bilinear(plan, direction, a, b);
  if (lambda) {
    const double sp = plan.sum(), sd = direction.sum();
    quad -= 2.0 * *lambda * sd * sd;
    lin -= 4.0 * *lambda * sp * sd;
  }
  if (quad > 0.0) {
    const double t = -lin / (2.0 * quad);
    return std::clamp(t, 0.0, 1.0);
  }
  // concave or linear along the segment: pick the better endpoint
  return (quad + lin < 0.0) ? 1.0 : 0.0;
}

std::pair<TransportPlan, SolveReport> solve_gw(const GmSpace& a,
                                               const GmSpace& b,
                                               const FwConfig& cfg) {
  const double ta = a.total_mass(), tb = b.total_mass();
  if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::max(ta, tb)))
    throw InputError("balanced GW requires equal total masses");
  if (should_swap(a, b))
    return transpose_result(fw_solve({b, a, std::nullopt}, cfg, nullptr));
  return fw_solve({a, b, std::nullopt}, cfg, nullptr);
}

std::pair<TransportPlan, SolveReport> solve_gw_from(
    const GmSpace& a, const GmSpace& b, const Eigen::MatrixXd& initial_plan,
    const FwConfig& cfg) {
  check_dims(initial_plan, a, b);
  if (should_swap(a, b)) {
    const Eigen::MatrixXd transposed = initial_plan.transpose();
    return transpose_result(fw_solve({b, a, std::nullopt}, cfg, &transposed));
  }
  return fw_solve({a, b, std::nullopt}, cfg, &initial_plan);
}

std::pair<TransportPlan, SolveReport> solve_pgw(const GmSpace& a,
                                                const GmSpace& b,
                                                double lambda,
                                                const FwConfig& cfg) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  if (2.0 * lambda > gauge_mismatch_bound(a, b))
    std::cerr << "[pgw] note: 2*lambda exceeds the gauge mismatch bound; "
                 "the partial solve degenerates to the balanced case\n";
  if (should_swap(a, b))
    return transpose_result(fw_solve({b, a, lambda}, cfg, nullptr));
  return fw_solve({a, b, lambda}, cfg, nullptr);
}

double gauge_mismatch_bound(const GmSpace& a, const GmSpace& b) {
  const double amin = a.gauge().minCoeff(), amax = a.gauge().maxCoeff();
  const double bmin = b.gauge().minCoeff(), bmax = b.gauge().maxCoeff();
  const double d1 = amax - bmin, d2 = bmax - amin;
  return std::max(d1 * d1, d2 * d2);
}

std::uint64_t solver_call_count() {
  return g_solver_calls.load(std::memory_order_relaxed);
}

void reset_solver_call_count() {
  g_solver_calls.store(0, std::memory_order_relaxed);
}

}  // namespace pgw

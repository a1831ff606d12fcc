#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pgw/gmspace.hpp"
#include "pgw/transport_lp.hpp"

namespace pgw {

enum class FwInit { Product, Identity, RandomFeasible };
enum class FwTermination { Converged, MaxIters };

struct FwConfig {
  int max_iters = 1000;
  double rel_tol = 1e-9;
  int restarts = 1;
  std::uint64_t seed = 0;
  FwInit init = FwInit::Product;
};

struct SolveReport {
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> step_sizes;
  FwTermination termination = FwTermination::Converged;
  std::vector<double> objective_trace;
  double lambda = 0.0;  // 0 for balanced GW runs
};

/// Quadratic GW discrepancy sum_{i,i',j,j'} (gA[i][i'] - gB[j][j'])^2
/// gamma[i][j] gamma[i'][j'], evaluated in the factored O(n^2 m + n m^2) form.
double gw_objective(const Eigen::MatrixXd& plan, const GmSpace& a,
                    const GmSpace& b);

/// gw_objective plus the mass penalties lambda (|p|^2 - |gamma|^2) +
/// lambda (|q|^2 - |gamma|^2). Throws if `plan` leaves Gamma_<=(p, q).
double pgw_objective(const Eigen::MatrixXd& plan, const GmSpace& a,
                     const GmSpace& b, double lambda);

Eigen::MatrixXd gw_gradient(const Eigen::MatrixXd& plan, const GmSpace& a,
                            const GmSpace& b);
Eigen::MatrixXd pgw_gradient(const Eigen::MatrixXd& plan, const GmSpace& a,
                             const GmSpace& b, double lambda);

/// Exact minimizer over t in [0,1] of the univariate quadratic
/// t -> objective(plan + t * direction); `lambda` switches between the GW
/// and PGW objectives.
double fw_line_search(const Eigen::MatrixXd& plan,
                      const Eigen::MatrixXd& direction, const GmSpace& a,
                      const GmSpace& b,
                      std::optional<double> lambda = std::nullopt);

/// Frank-Wolfe on the balanced GW problem; best result over cfg.restarts
/// initializations. Deterministic given (inputs, cfg).
std::pair<TransportPlan, SolveReport> solve_gw(const GmSpace& a,
                                               const GmSpace& b,
                                               const FwConfig& cfg = {});

/// Single Frank-Wolfe run started from an explicit feasible plan.
std::pair<TransportPlan, SolveReport> solve_gw_from(
    const GmSpace& a, const GmSpace& b, const Eigen::MatrixXd& initial_plan,
    const FwConfig& cfg = {});

/// Frank-Wolfe on the partial GW problem over Gamma_<=(p, q).
std::pair<TransportPlan, SolveReport> solve_pgw(const GmSpace& a,
                                                const GmSpace& b,
                                                double lambda,
                                                const FwConfig& cfg = {});

/// Largest (gA - gB)^2 mismatch over all gauge-entry pairs; 2*lambda above
/// this bound makes PGW transport maximal mass.
double gauge_mismatch_bound(const GmSpace& a, const GmSpace& b);

/// Process-wide count of Frank-Wolfe solves, for pipeline call accounting.
std::uint64_t solver_call_count();
void reset_solver_call_count();

}  // namespace pgw

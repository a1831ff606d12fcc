#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgw/gmspace.hpp"
#include "pgw/transport_lp.hpp"

namespace pgw {

struct OracleResult {
  double value = 0.0;
  std::string argmin_description;
  std::int64_t enumerated_count = 0;
};

/// Exact GW minimum over all n! permutation plans. Requires n = m <= 8 and
/// uniform equal masses on both sides.
OracleResult gw_permutation_oracle(const GmSpace& a, const GmSpace& b);

/// Deterministic sample of plans in Gamma_<=(p, q): randomly scaled random
/// vertices, pairwise convex-mixed.
std::vector<TransportPlan> random_feasible_plans(const Eigen::VectorXd& p,
                                                 const Eigen::VectorXd& q,
                                                 int count,
                                                 std::uint64_t seed);

/// Brute-force grid minimum of <cost, gamma> over Gamma_<=(p, q). Requires
/// n*m <= 6 and grid_steps <= 32; upper-bounds the LP optimum within
/// O(1/grid_steps).
OracleResult partial_ot_grid_oracle(const Eigen::MatrixXd& cost,
                                    const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& q, int grid_steps);

}  // namespace pgw

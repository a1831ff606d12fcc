#pragma once

#include <Eigen/Dense>

#include "pgw/errors.hpp"

namespace pgw {

/// A nonnegative coupling together with its realized marginals, total mass
/// and the linear objective it was solved for.
struct TransportPlan {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd row_marginal;  // matrix * 1
  Eigen::VectorXd col_marginal;  // matrix^T * 1
  double total = 0.0;
  double objective = 0.0;

  static TransportPlan from_matrix(Eigen::MatrixXd m, double objective = 0.0);
};

/// Exact minimizer of <cost, gamma> over the balanced transport polytope
/// Gamma(p, q). Returns a vertex of the polytope (transportation simplex).
/// Requires sum(p) == sum(q) within 1e-9 relative.
TransportPlan solve_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& q);

/// Exact minimizer of <cost, gamma> over Gamma_<=(p, q) = {gamma >= 0,
/// gamma 1 <= p, gamma^T 1 <= q}. Solved by augmenting with a zero-cost
/// dummy row/column carrying masses |q| and |p|, solving the balanced
/// problem, and truncating the dummy.
TransportPlan solve_partial_ot(const Eigen::MatrixXd& cost,
                               const Eigen::VectorXd& p,
                               const Eigen::VectorXd& q);

}  // namespace pgw

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pgw/fw_solvers.hpp"
#include "pgw/gmspace.hpp"

namespace pgw {

struct BarycenterConfig {
  Eigen::Index support_size = 0;   // 0 = median input size
  std::vector<double> weights;     // empty = uniform over inputs
  int outer_iters = 20;
  FwConfig fw_cfg;
  std::uint64_t seed = 0;
};

struct BarycenterResult {
  GmSpace space;  // Precomputed gauge, uniform mass summing to 1
  std::vector<double> objective_trace;  // sum_k t_k GW^2(C, input_k) per outer iteration
};

/// Block-coordinate GW barycenter: alternates plan solves against each input
/// with the closed-form gauge update. Inputs must carry total mass 1.
BarycenterResult gw_barycenter(const std::vector<GmSpace>& inputs,
                               const BarycenterConfig& cfg);

/// Classical multidimensional scaling of a squared-distance matrix:
/// double-center, eigendecompose, keep the top `dim` nonnegative directions.
/// Rows of the result are the recovered coordinates (mean zero).
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& gauge, Eigen::Index dim);

}  // namespace pgw

#include "pgw/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pgw {

namespace {

// Sorted uniform subsample (without replacement when possible) of
// {0, ..., n-1} of size k.
std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index k,
                                            std::mt19937_64& rng) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> picked;
  if (k <= n) {
    std::sample(all.begin(), all.end(), std::back_inserter(picked),
                static_cast<std::size_t>(k), rng);
  } else {
    picked = all;
    std::uniform_int_distribution<Eigen::Index> dist(0, n - 1);
    while (static_cast<Eigen::Index>(picked.size()) < k)
      picked.push_back(dist(rng));
    std::sort(picked.begin(), picked.end());
  }
  return picked;
}

}  // namespace

BarycenterResult gw_barycenter(const std::vector<GmSpace>& inputs,
                               const BarycenterConfig& cfg) {
  if (inputs.empty()) throw InputError("barycenter needs at least one input");
  const std::size_t k_inputs = inputs.size();
  for (const GmSpace& s : inputs)
    if (std::abs(s.total_mass() - 1.0) > 1e-9)
      throw InputError("barycenter inputs must carry total mass 1");

  std::vector<double> weights = cfg.weights;
  if (weights.empty())
    weights.assign(k_inputs, 1.0 / static_cast<double>(k_inputs));
  if (weights.size() != k_inputs)
    throw InputError("weight/input count mismatch");
  double wsum = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw InputError("negative barycenter weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw InputError("barycenter weights must sum to 1");

  Eigen::Index n0 = cfg.support_size;
  if (n0 <= 0) {
    std::vector<Eigen::Index> sizes;
    for (const GmSpace& s : inputs) sizes.push_back(s.size());
    std::sort(sizes.begin(), sizes.end());
    n0 = sizes[sizes.size() / 2];
  }

  const bool all_sqeuclidean =
      std::all_of(inputs.begin(), inputs.end(), [](const GmSpace& s) {
        return s.kind() == GaugeKind::SquaredEuclidean;
      });

  // init: subsampled gauge of a random input
  std::mt19937_64 rng(cfg.seed);
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(
      0, k_inputs - 1)(rng);
  const auto idx = subsample_indices(inputs[pick].size(), n0, rng);
  Eigen::MatrixXd gauge(n0, n0);
  for (Eigen::Index i = 0; i < n0; ++i)
    for (Eigen::Index j = 0; j < n0; ++j)
      gauge(i, j) = inputs[pick].gauge()(idx[static_cast<std::size_t>(i)],
                                         idx[static_cast<std::size_t>(j)]);
  if (all_sqeuclidean) gauge.diagonal().setZero();

  const Eigen::VectorXd mass =
      Eigen::VectorXd::Constant(n0, 1.0 / static_cast<double>(n0));
  const Eigen::MatrixXd mass_outer = mass * mass.transpose();

  std::vector<Eigen::MatrixXd> plans(k_inputs);
  BarycenterResult result{GmSpace::from_gauge(gauge, mass), {}};

  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    double objective = 0.0;
    for (std::size_t k = 0; k < k_inputs; ++k) {
      auto [plan, report] =
          plans[k].size() == 0
              ? solve_gw(result.space, inputs[k], cfg.fw_cfg)
              : solve_gw_from(result.space, inputs[k], plans[k], cfg.fw_cfg);
      plans[k] = plan.matrix;
      objective += weights[k] * report.objective;
    }
    result.objective_trace.push_back(objective);

    gauge.setZero();
    for (std::size_t k = 0; k < k_inputs; ++k)
      gauge.noalias() +=
          weights[k] * (plans[k] * inputs[k].gauge() * plans[k].transpose());
    gauge.array() /= mass_outer.array();
    gauge = ((gauge + gauge.transpose()) * 0.5).eval();
    if (all_sqeuclidean) {
      gauge = gauge.cwiseMax(0.0);
      gauge.diagonal().setZero();
    }
    result.space = GmSpace::from_gauge(gauge, mass);

    if (result.objective_trace.size() >= 2) {
      const double prev = result.objective_trace[result.objective_trace.size() - 2];
      if (std::abs(prev - objective) <= 1e-12 * std::max(1.0, std::abs(prev)))
        break;
    }
  }
  return result;
}

Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& gauge, Eigen::Index dim) {
  const Eigen::Index n = gauge.rows();
  if (gauge.cols() != n) throw InputError("gauge must be square");
  if (dim < 1 || dim > n) throw InputError("embedding dimension out of range");
  if ((gauge - gauge.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw InputError("gauge must be symmetric");

  // B = -1/2 J g J with J = I - (1/n) 1 1^T
  const Eigen::MatrixXd j_center =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd b = -0.5 * j_center * gauge * j_center;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      ((b + b.transpose()) * 0.5).eval());
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed in MDS");

  // eigenvalues come back ascending; take the top `dim`, truncating
  // negative ones to zero
  Eigen::MatrixXd coords(n, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const Eigen::Index src = n - 1 - c;
    const double ev = std::max(solver.eigenvalues()[src], 0.0);
    coords.col(c) = solver.eigenvectors().col(src) * std::sqrt(ev);
  }
  return coords;
}

}  // namespace pgw

#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "pgw/fw_solvers.hpp"
#include "pgw/gmspace.hpp"

namespace pgw {

/// Target space expressed against a fixed reference: gauge-difference matrix
/// K on the reference atoms, transported mass per atom q, and the scalar
/// created mass gamma_c = |nu|^2 - (sum q)^2.
struct LpgwEmbedding {
  std::string reference_id;
  double lambda = 0.0;
  Eigen::MatrixXd K;
  Eigen::VectorXd q;
  double gamma_c = 0.0;
  double target_total_mass = 0.0;
  GaugeKind gauge_kind = GaugeKind::SquaredEuclidean;
};

/// Balanced counterpart: K plus the reference weights.
struct LgwEmbedding {
  std::string reference_id;
  Eigen::MatrixXd K;
  Eigen::VectorXd weights;
};

/// Mass-weighted average of transported targets per source atom. Rows of the
/// plan with zero mass map to the origin. Returns (projected points, row
/// masses).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> barycentric_project(
    const Eigen::MatrixXd& plan, const Eigen::MatrixXd& target_points);

LpgwEmbedding lpgw_embedding_from_plan(const GmSpace& reference,
                                       const GmSpace& target,
                                       const Eigen::MatrixXd& plan,
                                       double lambda,
                                       const std::string& reference_id = "");

/// Solves PGW(reference, target) and embeds the resulting plan.
LpgwEmbedding embed_lpgw(const GmSpace& reference, const GmSpace& target,
                         double lambda, const FwConfig& cfg = {},
                         const std::string& reference_id = "");

LgwEmbedding lgw_embedding_from_plan(const GmSpace& reference,
                                     const GmSpace& target,
                                     const Eigen::MatrixXd& plan,
                                     const std::string& reference_id = "");

LgwEmbedding embed_lgw(const GmSpace& reference, const GmSpace& target,
                       const FwConfig& cfg = {},
                       const std::string& reference_id = "");

/// Closed-form embedding-space discrepancy approximating PGW between the two
/// embedded targets. Requires matching reference and lambda.
double alpgw_distance(const LpgwEmbedding& e1, const LpgwEmbedding& e2);

/// Balanced counterpart: sum (K1-K2)^2 weighted by the reference mass.
double algw_distance(const LgwEmbedding& e1, const LgwEmbedding& e2);

/// q^T (K o K) q + lambda (|mu|^2 - (sum q)^2 + gamma_c); equals the PGW
/// value of the embedded plan whenever that plan was row-Monge.
double recover_pgw_from_embedding(const LpgwEmbedding& e,
                                  double reference_total_mass);

void write_embedding(const LpgwEmbedding& e, const std::string& path);
LpgwEmbedding read_embedding(const std::string& path);

}  // namespace pgw

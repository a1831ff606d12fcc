#include "pgw/linearize.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace pgw {

std::pair<Eigen::MatrixXd, Eigen::VectorXd> barycentric_project(
    const Eigen::MatrixXd& plan, const Eigen::MatrixXd& target_points) {
  if (plan.cols() != target_points.rows())
    throw InputError("plan/target size mismatch in barycentric projection");
  const Eigen::VectorXd q = plan.rowwise().sum();
  Eigen::MatrixXd projected = plan * target_points;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0)
      projected.row(i) /= q[i];
    else
      projected.row(i).setZero();
  }
  return {std::move(projected), q};
}

namespace {

// g evaluated on projected points minus the reference gauge.
Eigen::MatrixXd embedding_matrix(const GmSpace& reference,
                                 const GmSpace& target,
                                 const Eigen::MatrixXd& projected) {
  if (target.kind() == GaugeKind::Precomputed)
    throw InputError("embedding requires a point-backed target gauge");
  const Eigen::MatrixXd g_proj = build_gauge(projected, target.kind());
  return g_proj - reference.gauge();
}

void check_plan_shape(const GmSpace& reference, const GmSpace& target,
                      const Eigen::MatrixXd& plan) {
  if (plan.rows() != reference.size() || plan.cols() != target.size())
    throw InputError("plan dimensions do not match reference/target");
}

}  // namespace

LpgwEmbedding lpgw_embedding_from_plan(const GmSpace& reference,
                                       const GmSpace& target,
                                       const Eigen::MatrixXd& plan,
                                       double lambda,
                                       const std::string& reference_id) {
  check_plan_shape(reference, target, plan);
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  auto [projected, q] = barycentric_project(plan, target.points());

  LpgwEmbedding e;
  e.reference_id = reference_id;
  e.lambda = lambda;
  e.K = embedding_matrix(reference, target, projected);
  e.q = std::move(q);
  e.target_total_mass = target.total_mass();
  const double transported = e.q.sum();
  e.gamma_c = e.target_total_mass * e.target_total_mass - transported * transported;
  e.gauge_kind = target.kind();
  return e;
}

LpgwEmbedding embed_lpgw(const GmSpace& reference, const GmSpace& target,
                         double lambda, const FwConfig& cfg,
                         const std::string& reference_id) {
  auto [plan, report] = solve_pgw(reference, target, lambda, cfg);
  return lpgw_embedding_from_plan(reference, target, plan.matrix, lambda,
                                  reference_id);
}

LgwEmbedding lgw_embedding_from_plan(const GmSpace& reference,
                                     const GmSpace& target,
                                     const Eigen::MatrixXd& plan,
                                     const std::string& reference_id) {
  check_plan_shape(reference, target, plan);
  auto [projected, q] = barycentric_project(plan, target.points());
  LgwEmbedding e;
  e.reference_id = reference_id;
  e.K = embedding_matrix(reference, target, projected);
  e.weights = reference.mass();
  return e;
}

LgwEmbedding embed_lgw(const GmSpace& reference, const GmSpace& target,
                       const FwConfig& cfg, const std::string& reference_id) {
  auto [plan, report] = solve_gw(reference, target, cfg);
  return lgw_embedding_from_plan(reference, target, plan.matrix, reference_id);
}

double alpgw_distance(const LpgwEmbedding& e1, const LpgwEmbedding& e2) {
  if (e1.reference_id != e2.reference_id)
    throw InputError("embeddings use different references");
  if (e1.lambda != e2.lambda)
    throw InputError("embeddings use different lambda values");
  if (e1.K.rows() != e2.K.rows() || e1.q.size() != e2.q.size())
    throw InputError("embedding size mismatch");

  const Eigen::VectorXd q12 = e1.q.cwiseMin(e2.q);
  const Eigen::MatrixXd diff = e1.K - e2.K;
  const double quad = q12.dot(diff.cwiseProduct(diff) * q12);
  const double shared = q12.sum();
  const double mass_term = e1.target_total_mass * e1.target_total_mass +
                           e2.target_total_mass * e2.target_total_mass -
                           2.0 * shared * shared;
  return quad + e1.lambda * mass_term;
}

double algw_distance(const LgwEmbedding& e1, const LgwEmbedding& e2) {
  if (e1.reference_id != e2.reference_id)
    throw InputError("embeddings use different references");
  if (e1.K.rows() != e2.K.rows()) throw InputError("embedding size mismatch");
  const Eigen::MatrixXd diff = e1.K - e2.K;
  return e1.weights.dot(diff.cwiseProduct(diff) * e1.weights);
}

double recover_pgw_from_embedding(const LpgwEmbedding& e,
                                  double reference_total_mass) {
  const double quad = e.q.dot(e.K.cwiseProduct(e.K) * e.q);
  const double transported = e.q.sum();
  return quad + e.lambda * (reference_total_mass * reference_total_mass -
                            transported * transported + e.gamma_c);
}

void write_embedding(const LpgwEmbedding& e, const std::string& path) {
  nlohmann::json j;
  j["reference_id"] = e.reference_id;
  j["lambda"] = e.lambda;
  j["q"] = std::vector<double>(e.q.data(), e.q.data() + e.q.size());
  auto k_rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < e.K.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < e.K.cols(); ++c) row.push_back(e.K(i, c));
    k_rows.push_back(std::move(row));
  }
  j["K"] = std::move(k_rows);
  j["gamma_c"] = e.gamma_c;
  j["target_total_mass"] = e.target_total_mass;
  j["gauge_kind"] = to_string(e.gauge_kind);

  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

LpgwEmbedding read_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& err) {
    throw MalformedInputError(std::string("bad embedding file: ") + err.what());
  }

  LpgwEmbedding e;
  try {
    e.reference_id = j.at("reference_id").get<std::string>();
    e.lambda = j.at("lambda").get<double>();
    const auto q = j.at("q").get<std::vector<double>>();
    e.q = Eigen::Map<const Eigen::VectorXd>(q.data(),
                                            static_cast<Eigen::Index>(q.size()));
    const auto& k = j.at("K");
    const Eigen::Index n = static_cast<Eigen::Index>(k.size());
    e.K.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = k.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != n)
        throw MalformedInputError("non-square K in " + path);
      for (Eigen::Index c = 0; c < n; ++c) e.K(i, c) = row[static_cast<std::size_t>(c)];
    }
    e.gamma_c = j.at("gamma_c").get<double>();
    e.target_total_mass = j.at("target_total_mass").get<double>();
    e.gauge_kind = gauge_kind_from_string(j.at("gauge_kind").get<std::string>());
  } catch (const MalformedInputError&) {
    throw;
  } catch (const std::exception& err) {
    throw MalformedInputError(std::string("bad embedding file: ") + err.what());
  }
  if (e.q.size() != e.K.rows())
    throw MalformedInputError("q/K size mismatch in " + path);
  return e;
}

}  // namespace pgw

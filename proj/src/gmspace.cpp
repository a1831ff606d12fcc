#include "pgw/gmspace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace pgw {

std::string to_string(GaugeKind kind) {
  switch (kind) {
    case GaugeKind::SquaredEuclidean: return "squared_euclidean";
    case GaugeKind::InnerProduct: return "inner_product";
    case GaugeKind::Precomputed: return "precomputed";
  }
  return "unknown";
}

GaugeKind gauge_kind_from_string(const std::string& name) {
  if (name == "squared_euclidean") return GaugeKind::SquaredEuclidean;
  if (name == "inner_product") return GaugeKind::InnerProduct;
  if (name == "precomputed") return GaugeKind::Precomputed;
  throw InputError("unknown gauge kind: " + name);
}

namespace {

void check_mass(const Eigen::VectorXd& mass) {
  if (mass.size() < 1) throw InputError("mass vector is empty");
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    if (!std::isfinite(mass[i])) throw InputError("non-finite mass entry");
    if (mass[i] < 0.0) throw InputError("negative mass entry");
  }
  const double total = mass.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw InputError("total mass must be finite and positive");
}

}  // namespace

Eigen::MatrixXd build_gauge(const Eigen::MatrixXd& points, GaugeKind kind) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd g(n, n);
  switch (kind) {
    case GaugeKind::SquaredEuclidean: {
      const Eigen::VectorXd sq = points.rowwise().squaredNorm();
      g = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
          2.0 * points * points.transpose();
      g = g.cwiseMax(0.0);
      g.diagonal().setZero();
      // exact symmetry regardless of rounding in the products above
      g = ((g + g.transpose()) * 0.5).eval();
      break;
    }
    case GaugeKind::InnerProduct: {
      g = points * points.transpose();
      g = ((g + g.transpose()) * 0.5).eval();
      break;
    }
    case GaugeKind::Precomputed:
      throw InputError("cannot build a gauge for kind 'precomputed'");
  }
  return g;
}

GmSpace GmSpace::from_points(const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& mass, GaugeKind kind) {
  if (kind == GaugeKind::Precomputed)
    throw InputError("from_points requires a point-based gauge kind");
  if (points.rows() < 1) throw InputError("need at least one point");
  if (points.rows() != mass.size())
    throw InputError("points/mass length mismatch");
  if (!points.allFinite()) throw InputError("non-finite point coordinate");
  check_mass(mass);

  GmSpace s;
  s.points_ = points;
  s.gauge_ = build_gauge(points, kind);
  s.mass_ = mass;
  s.kind_ = kind;
  return s;
}

GmSpace GmSpace::from_gauge(const Eigen::MatrixXd& gauge,
                            const Eigen::VectorXd& mass) {
  if (gauge.rows() != gauge.cols()) throw InputError("gauge must be square");
  if (gauge.rows() != mass.size()) throw InputError("gauge/mass size mismatch");
  if (!gauge.allFinite()) throw InputError("non-finite gauge entry");
  if ((gauge - gauge.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InputError("gauge matrix is not symmetric");
  check_mass(mass);

  GmSpace s;
  s.gauge_ = ((gauge + gauge.transpose()) * 0.5).eval();
  s.mass_ = mass;
  s.kind_ = GaugeKind::Precomputed;
  return s;
}

const Eigen::MatrixXd& GmSpace::points() const {
  if (!points_) throw InputError("space has no points");
  return *points_;
}

GmSpace normalize_scale(const GmSpace& space) {
  if (!space.has_points()) throw InputError("normalize_scale needs points");
  if (space.kind() != GaugeKind::SquaredEuclidean)
    throw InputError("normalize_scale requires squared-Euclidean gauge");
  if (space.size() < 2) throw NoScaleError("need at least two points to scale");

  const double max_sq = space.gauge().maxCoeff();
  if (!(max_sq > 0.0)) throw NoScaleError("all points identical, no scale");
  const double factor = 1.0 / std::sqrt(max_sq);
  return GmSpace::from_points(space.points() * factor, space.mass(),
                              space.kind());
}

GmSpace normalize_mass(const GmSpace& space, double target_total) {
  if (!(target_total > 0.0)) throw InputError("target total must be positive");
  const double total = space.total_mass();
  if (!(total > 0.0)) throw InputError("zero total mass");
  const Eigen::VectorXd scaled = space.mass() * (target_total / total);
  if (space.has_points())
    return GmSpace::from_points(space.points(), scaled, space.kind());
  return GmSpace::from_gauge(space.gauge(), scaled);
}

GmSpace read_pointcloud(const std::string& path, GaugeKind kind, bool header) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && header) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace((unsigned char)cell[pos])) ++pos;
        if (pos != cell.size())
          throw MalformedInputError("malformed cell '" + cell + "' in " + path);
        row.push_back(v);
      } catch (const MalformedInputError&) {
        throw;
      } catch (const std::exception&) {
        throw MalformedInputError("malformed cell '" + cell + "' in " + path);
      }
    }
    if (row.size() < 2)
      throw MalformedInputError("row with fewer than two columns in " + path);
    if (!rows.empty() && row.size() != rows.front().size())
      throw MalformedInputError("inconsistent column count in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw MalformedInputError("empty point-cloud file " + path);

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size()) - 1;
  Eigen::MatrixXd points(n, d);
  Eigen::VectorXd mass(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) points(i, j) = rows[i][j];
    mass[i] = rows[i][d];
  }
  return GmSpace::from_points(points, mass, kind);
}

void write_pointcloud(const GmSpace& space, const std::string& path) {
  if (!space.has_points()) throw InputError("space has no points to write");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  char buf[64];
  const auto& pts = space.points();
  for (Eigen::Index i = 0; i < space.size(); ++i) {
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", pts(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", space.mass()[i]);
    out << buf << '\n';
  }
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace pgw

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "pgw/errors.hpp"

namespace pgw {

enum class GaugeKind { SquaredEuclidean, InnerProduct, Precomputed };

std::string to_string(GaugeKind kind);
GaugeKind gauge_kind_from_string(const std::string& name);

/// Discrete gauged measure space: a symmetric pairwise gauge matrix plus a
/// nonnegative mass vector, optionally backed by points in R^d (rows of
/// `points`). Immutable after construction; safe to share across threads.
class GmSpace {
 public:
  /// Builds the gauge from points. `kind` must not be Precomputed.
  static GmSpace from_points(const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& mass, GaugeKind kind);

  /// Wraps an externally supplied gauge matrix (no points attached).
  static GmSpace from_gauge(const Eigen::MatrixXd& gauge,
                            const Eigen::VectorXd& mass);

  Eigen::Index size() const { return mass_.size(); }
  Eigen::Index dim() const { return points_ ? points_->cols() : 0; }
  bool has_points() const { return points_.has_value(); }
  const Eigen::MatrixXd& points() const;
  const Eigen::MatrixXd& gauge() const { return gauge_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  double total_mass() const { return mass_.sum(); }
  GaugeKind kind() const { return kind_; }

 private:
  GmSpace() = default;

  std::optional<Eigen::MatrixXd> points_;
  Eigen::MatrixXd gauge_;
  Eigen::VectorXd mass_;
  GaugeKind kind_ = GaugeKind::Precomputed;
};

/// Pairwise gauge of a point set: squared Euclidean distances or inner
/// products, depending on `kind`.
Eigen::MatrixXd build_gauge(const Eigen::MatrixXd& points, GaugeKind kind);

/// Rescales the points uniformly so the largest pairwise distance is 1 and
/// rebuilds the gauge. Masses are unchanged. Throws NoScaleError when all
/// points coincide.
GmSpace normalize_scale(const GmSpace& space);

/// Rescales the mass vector so it sums to `target_total`.
GmSpace normalize_mass(const GmSpace& space, double target_total);

/// Point-cloud CSV: one row per point, d coordinate columns followed by one
/// mass column. `header` skips a leading header line.
GmSpace read_pointcloud(const std::string& path, GaugeKind kind,
                        bool header = false);
void write_pointcloud(const GmSpace& space, const std::string& path);

}  // namespace pgw

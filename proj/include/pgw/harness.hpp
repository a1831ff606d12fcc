#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pgw/fw_solvers.hpp"
#include "pgw/gmspace.hpp"
#include "pgw/linearize.hpp"

namespace pgw {

enum class PairwiseMethod { GW, PGW, aLGW, aLPGW };

std::string to_string(PairwiseMethod method);
PairwiseMethod pairwise_method_from_string(const std::string& name);

/// Symmetric matrix of pairwise dissimilarities. `values` holds the
/// distances (square roots), `squared` the raw discrepancies the solvers
/// and embedding formulas produce.
struct DistanceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
  Eigen::MatrixXd squared;
  PairwiseMethod method = PairwiseMethod::GW;
  std::optional<double> lambda;
  std::optional<std::string> reference_id;
  std::int64_t solver_calls = 0;
  double wall_clock_seconds = 0.0;
};

struct PairRow {
  Eigen::Index i = 0, j = 0;
  double exact_sq = 0.0;
  double linear_sq = 0.0;
  double rel_err = 0.0;
};

struct EvalReport {
  double mre = 0.0;
  double pcc = 0.0;
  std::optional<double> knn_accuracy;
  std::vector<PairRow> per_pair_rows;
};

struct KnnResult {
  double accuracy = 0.0;
  std::vector<std::string> class_names;
  Eigen::MatrixXd confusion;  // rows: true class, cols: predicted, averaged
};

struct ManifestEntry {
  std::string id, path, label;
};

struct Manifest {
  std::vector<ManifestEntry> shapes;
  GaugeKind gauge_kind = GaugeKind::SquaredEuclidean;
};

// shape sampling ------------------------------------------------------------

/// Uniform sample of a filled ellipse with semi-axes (a, b) rotated by
/// `angle`, as an n x 2 point matrix.
Eigen::MatrixXd sample_ellipse(int n, double a, double b, double angle,
                               std::mt19937_64& rng);

/// Uniform sample of the annulus with radii [r_inner, 1].
Eigen::MatrixXd sample_annulus(int n, double r_inner, std::mt19937_64& rng);

/// Writes `count` scale-normalized elliptical point clouds with uniform
/// masses 1/n plus a manifest.json into `out_dir`.
Manifest gen_ellipses(int count, int n_min, int n_max, std::uint64_t seed,
                      const std::string& out_dir);

/// Appends ceil(eta * n) uniform points inside the bounding box, each with
/// mass total/n (last one trimmed so the added mass is exactly eta * total).
GmSpace corrupt_with_noise(const GmSpace& space, double eta,
                           std::uint64_t seed);

// pipelines -----------------------------------------------------------------

struct PairwiseOptions {
  PairwiseMethod method = PairwiseMethod::GW;
  std::optional<double> lambda;
  const GmSpace* reference = nullptr;
  std::string reference_id;
  FwConfig fw;
  int jobs = 0;  // 0 = hardware concurrency
};

/// GW/PGW: one solve per unordered pair (K(K-1)/2 calls). aLGW/aLPGW: one
/// solve per shape (K calls), then closed-form embedding distances.
DistanceMatrix pairwise(const std::vector<GmSpace>& spaces,
                        const std::vector<std::string>& ids,
                        const PairwiseOptions& options);

/// Standard mass conventions: balanced methods get total mass 1 per shape,
/// partial methods get mass 1/median(sizes) on every point.
std::vector<GmSpace> apply_mass_convention(const std::vector<GmSpace>& spaces,
                                           PairwiseMethod method);

/// MRE and Pearson correlation between exact and linearized squared
/// discrepancies over unordered pairs with exact > floor.
EvalReport eval_mre_pcc(const DistanceMatrix& exact,
                        const DistanceMatrix& linearized,
                        double floor = 1e-10);

/// Per trial: one random representative per class, every other shape gets
/// its nearest representative's label; accuracy averaged over trials.
KnnResult knn_classify(const DistanceMatrix& dm,
                       const std::vector<std::string>& labels, int trials,
                       std::uint64_t seed);

/// CSV of exp(-sigma * D) after min-max normalizing D to [0, 1].
void export_kernel(const DistanceMatrix& dm, double sigma,
                   const std::string& path);

// persistence ---------------------------------------------------------------

void write_manifest(const Manifest& manifest, const std::string& path);
Manifest read_manifest(const std::string& path);

/// Loads every shape listed in a manifest (paths resolved relative to the
/// manifest file). Returns spaces; ids/labels through the out parameters.
std::vector<GmSpace> load_manifest_shapes(const std::string& manifest_path,
                                          std::vector<std::string>* ids,
                                          std::vector<std::string>* labels);

void write_matrix_csv(const std::vector<std::string>& ids,
                      const Eigen::MatrixXd& matrix, const std::string& path);
std::pair<std::vector<std::string>, Eigen::MatrixXd> read_matrix_csv(
    const std::string& path);

/// Writes <path> (distances), the sibling *_sq file (raw squared values) and
/// <path>.meta.json (method, lambda, reference, solver calls).
void save_distance_matrix(const DistanceMatrix& dm, const std::string& path);
DistanceMatrix load_distance_matrix(const std::string& path);

}  // namespace pgw

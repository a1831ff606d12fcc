// Command-line driver for the partial Gromov-Wasserstein toolkit: dataset
// generation, pairwise distance matrices, embedding pipelines and the
// evaluation metrics built on top of them.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "pgw/fw_solvers.hpp"
#include "pgw/gmspace.hpp"
#include "pgw/harness.hpp"
#include "pgw/linearize.hpp"
#include "pgw/reference.hpp"

namespace fs = std::filesystem;
using namespace pgw;

namespace {

struct SolverFlags {
  int max_iters = 1000;
  double tol = 1e-9;
  int restarts = 1;
  std::uint64_t seed = 0;

  FwConfig config() const {
    FwConfig cfg;
    cfg.max_iters = max_iters;
    cfg.rel_tol = tol;
    cfg.restarts = restarts;
    cfg.seed = seed;
    return cfg;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--max-iters", flags.max_iters, "Frank-Wolfe iteration cap")
      ->capture_default_str();
  cmd->add_option("--tol", flags.tol, "relative objective tolerance")
      ->capture_default_str();
  cmd->add_option("--restarts", flags.restarts, "best-of-k initializations")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "random seed")->capture_default_str();
}

GmSpace load_reference(const std::string& path, GaugeKind kind,
                       bool header) {
  return read_pointcloud(path, kind, header);
}

GmSpace build_auto_reference(const std::vector<GmSpace>& shapes,
                             const std::vector<std::string>& labels,
                             Eigen::Index support_size, const SolverFlags& flags) {
  // one shape per label, as balanced unit-mass inputs
  std::vector<GmSpace> picks;
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (std::find(seen.begin(), seen.end(), labels[i]) != seen.end()) continue;
    seen.push_back(labels[i]);
    picks.push_back(normalize_mass(shapes[i], 1.0));
  }
  BarycenterConfig cfg;
  cfg.support_size = support_size;
  cfg.fw_cfg = flags.config();
  cfg.seed = flags.seed;
  return gw_barycenter(picks, cfg).space;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial Gromov-Wasserstein toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  // gen-ellipses ------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-ellipses",
                                 "generate a synthetic ellipse dataset");
  int gen_count = 20, gen_n_min = 40, gen_n_max = 80;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "ellipses";
  gen->add_option("--count", gen_count)->capture_default_str();
  gen->add_option("--n-min", gen_n_min)->capture_default_str();
  gen->add_option("--n-max", gen_n_max)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();

  // corrupt -----------------------------------------------------------------
  auto* corrupt = app.add_subcommand("corrupt",
                                     "add uniform bounding-box noise mass");
  std::string corrupt_in, corrupt_out = "corrupted.csv";
  double corrupt_eta = 0.3;
  std::uint64_t corrupt_seed = 0;
  corrupt->add_option("--input", corrupt_in, "point-cloud CSV")->required();
  bool corrupt_header = false;
  corrupt->add_flag("--header", corrupt_header,
                    "input CSV carries a header line");
  corrupt->add_option("--eta", corrupt_eta, "added mass fraction")
      ->capture_default_str();
  corrupt->add_option("--seed", corrupt_seed)->capture_default_str();
  corrupt->add_option("--out", corrupt_out)->capture_default_str();

  // barycenter ----------------------------------------------------------------
  auto* bary = app.add_subcommand("barycenter",
                                  "GW barycenter of manifest shapes");
  std::string bary_manifest, bary_out = "reference";
  Eigen::Index bary_support = 0;
  int bary_outer = 20;
  bool bary_per_label = false;
  SolverFlags bary_flags;
  bary->add_option("--manifest", bary_manifest)->required();
  bary->add_option("--support-size", bary_support,
                   "barycenter atoms (0 = median input size)")
      ->capture_default_str();
  bary->add_option("--outer-iters", bary_outer)->capture_default_str();
  bary->add_flag("--per-label", bary_per_label,
                 "use one random shape per label instead of all shapes");
  bary->add_option("--out", bary_out, "output prefix")->capture_default_str();
  add_solver_flags(bary, bary_flags);

  // mds -----------------------------------------------------------------------
  auto* mds = app.add_subcommand(
      "mds", "recover coordinates from a gauge matrix CSV");
  std::string mds_gauge, mds_mass, mds_out = "reference_points.csv";
  Eigen::Index mds_dim = 2;
  mds->add_option("--gauge", mds_gauge, "gauge CSV (square, no ids)")
      ->required();
  mds->add_option("--mass", mds_mass, "mass CSV (one value per line)")
      ->required();
  mds->add_option("--dim", mds_dim)->capture_default_str();
  mds->add_option("--out", mds_out)->capture_default_str();

  // embed ---------------------------------------------------------------------
  auto* embed = app.add_subcommand("embed",
                                   "LPGW-embed every manifest shape");
  std::string embed_manifest, embed_reference, embed_out = "embeddings";
  std::string embed_method = "alpgw";
  double embed_lambda = 0.1;
  SolverFlags embed_flags;
  embed->add_option("--manifest", embed_manifest)->required();
  embed->add_option("--reference", embed_reference, "reference point-cloud CSV")
      ->required();
  bool embed_header = false;
  embed->add_flag("--header", embed_header,
                  "reference CSV carries a header line");
  embed->add_option("--method", embed_method)->capture_default_str();
  embed->add_option("--lambda", embed_lambda)->capture_default_str();
  embed->add_option("--out", embed_out, "output directory")
      ->capture_default_str();
  add_solver_flags(embed, embed_flags);

  // pairwise ------------------------------------------------------------------
  auto* pair = app.add_subcommand("pairwise",
                                  "pairwise distance matrix over a manifest");
  std::string pair_manifest, pair_method = "gw", pair_reference;
  std::string pair_out = "distances.csv";
  std::optional<double> pair_lambda;
  bool pair_auto_reference = false;
  Eigen::Index pair_support = 0;
  int pair_jobs = 0;
  SolverFlags pair_flags;
  pair->add_option("--manifest", pair_manifest)->required();
  pair->add_option("--method", pair_method, "gw|pgw|algw|alpgw")
      ->capture_default_str();
  pair->add_option("--lambda", pair_lambda, "mass penalty (pgw/alpgw)");
  pair->add_option("--reference", pair_reference, "reference point-cloud CSV");
  bool pair_header = false;
  pair->add_flag("--header", pair_header,
                 "reference CSV carries a header line");
  pair->add_flag("--auto-reference", pair_auto_reference,
                 "build a GW-barycenter reference from one shape per label");
  pair->add_option("--support-size", pair_support,
                   "auto-reference atoms (0 = median input size)");
  pair->add_option("--jobs", pair_jobs, "worker threads (0 = logical cores)")
      ->capture_default_str();
  pair->add_option("--out", pair_out)->capture_default_str();
  add_solver_flags(pair, pair_flags);

  // eval ------------------------------------------------------------------------
  auto* eval = app.add_subcommand(
      "eval", "MRE/PCC between exact and linearized matrices");
  std::string eval_exact, eval_linear, eval_out = "eval.json";
  double eval_floor = 1e-10;
  eval->add_option("--pgw", eval_exact, "exact distance matrix CSV")
      ->required();
  eval->add_option("--lpgw", eval_linear, "linearized distance matrix CSV")
      ->required();
  eval->add_option("--floor", eval_floor,
                   "drop pairs with exact squared value at or below this")
      ->capture_default_str();
  eval->add_option("--out", eval_out)->capture_default_str();

  // knn -------------------------------------------------------------------------
  auto* knn = app.add_subcommand(
      "knn", "nearest-representative classification accuracy");
  std::string knn_matrix, knn_manifest, knn_out = "knn.json";
  int knn_trials = 1000;
  std::uint64_t knn_seed = 0;
  knn->add_option("--matrix", knn_matrix)->required();
  knn->add_option("--manifest", knn_manifest, "manifest providing labels")
      ->required();
  knn->add_option("--trials", knn_trials)->capture_default_str();
  knn->add_option("--seed", knn_seed)->capture_default_str();
  knn->add_option("--out", knn_out)->capture_default_str();

  // export-kernel -----------------------------------------------------------------
  auto* kernel = app.add_subcommand("export-kernel",
                                    "exp(-sigma D) kernel matrix CSV");
  std::string kernel_matrix, kernel_out = "kernel.csv";
  double kernel_sigma = 1.0;
  kernel->add_option("--matrix", kernel_matrix)->required();
  kernel->add_option("--sigma", kernel_sigma)->capture_default_str();
  kernel->add_option("--out", kernel_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto manifest =
          gen_ellipses(gen_count, gen_n_min, gen_n_max, gen_seed, gen_out);
      std::cout << "wrote " << manifest.shapes.size() << " shapes to "
                << gen_out << "\n";
    } else if (corrupt->parsed()) {
      const GmSpace space = read_pointcloud(
          corrupt_in, GaugeKind::SquaredEuclidean, corrupt_header);
      write_pointcloud(corrupt_with_noise(space, corrupt_eta, corrupt_seed),
                       corrupt_out);
      std::cout << "wrote " << corrupt_out << "\n";
    } else if (bary->parsed()) {
      std::vector<std::string> ids, labels;
      auto shapes = load_manifest_shapes(bary_manifest, &ids, &labels);
      std::vector<GmSpace> inputs;
      if (bary_per_label) {
        std::vector<std::string> seen;
        for (std::size_t i = 0; i < shapes.size(); ++i) {
          if (std::find(seen.begin(), seen.end(), labels[i]) != seen.end())
            continue;
          seen.push_back(labels[i]);
          inputs.push_back(normalize_mass(shapes[i], 1.0));
        }
      } else {
        for (const auto& s : shapes) inputs.push_back(normalize_mass(s, 1.0));
      }
      BarycenterConfig cfg;
      cfg.support_size = bary_support;
      cfg.outer_iters = bary_outer;
      cfg.fw_cfg = bary_flags.config();
      cfg.seed = bary_flags.seed;
      const auto result = gw_barycenter(inputs, cfg);

      // gauge CSV (plain square matrix) + mass CSV, loadable as Precomputed
      const std::string gauge_path = bary_out + "_gauge.csv";
      const std::string mass_path = bary_out + "_mass.csv";
      std::ofstream gauge_out(gauge_path);
      char buf[64];
      for (Eigen::Index i = 0; i < result.space.size(); ++i) {
        for (Eigen::Index j = 0; j < result.space.size(); ++j) {
          std::snprintf(buf, sizeof(buf), "%.17g", result.space.gauge()(i, j));
          gauge_out << (j ? "," : "") << buf;
        }
        gauge_out << '\n';
      }
      std::ofstream mass_out(mass_path);
      for (Eigen::Index i = 0; i < result.space.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", result.space.mass()[i]);
        mass_out << buf << '\n';
      }
      std::cout << "wrote " << gauge_path << " and " << mass_path
                << " (objective trace:";
      for (const double v : result.objective_trace) std::cout << ' ' << v;
      std::cout << ")\n";
    } else if (mds->parsed()) {
      std::ifstream gauge_in(mds_gauge);
      if (!gauge_in) throw MalformedInputError("cannot open " + mds_gauge);
      std::vector<std::vector<double>> rows;
      std::string line;
      while (std::getline(gauge_in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
      }
      const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd gauge(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n)
          throw MalformedInputError("gauge CSV is not square");
        for (Eigen::Index j = 0; j < n; ++j) gauge(i, j) = rows[i][j];
      }
      std::ifstream mass_in(mds_mass);
      if (!mass_in) throw MalformedInputError("cannot open " + mds_mass);
      Eigen::VectorXd mass(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (!(mass_in >> mass[i]))
          throw MalformedInputError("mass CSV too short");

      const Eigen::MatrixXd coords = classical_mds(gauge, mds_dim);
      write_pointcloud(
          GmSpace::from_points(coords, mass, GaugeKind::SquaredEuclidean),
          mds_out);
      std::cout << "wrote " << mds_out << "\n";
    } else if (embed->parsed()) {
      if (pairwise_method_from_string(embed_method) != PairwiseMethod::aLPGW)
        throw InputError("only alpgw embeddings have a file format");
      std::vector<std::string> ids, labels;
      const auto raw = load_manifest_shapes(embed_manifest, &ids, &labels);
      const auto shapes = apply_mass_convention(raw, PairwiseMethod::aLPGW);
      const Manifest manifest = read_manifest(embed_manifest);
      const GmSpace reference =
          load_reference(embed_reference, manifest.gauge_kind, embed_header);
      fs::create_directories(embed_out);
      const std::string ref_id = fs::path(embed_reference).stem().string();
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto e = embed_lpgw(reference, shapes[i], embed_lambda,
                                  embed_flags.config(), ref_id);
        write_embedding(e,
                        (fs::path(embed_out) / (ids[i] + ".json")).string());
      }
      std::cout << "wrote " << shapes.size() << " embeddings to " << embed_out
                << "\n";
    } else if (pair->parsed()) {
      const PairwiseMethod method = pairwise_method_from_string(pair_method);
      std::vector<std::string> ids, labels;
      const auto raw = load_manifest_shapes(pair_manifest, &ids, &labels);
      const auto shapes = apply_mass_convention(raw, method);
      const Manifest manifest = read_manifest(pair_manifest);

      std::optional<GmSpace> reference;
      std::string reference_id;
      if (method == PairwiseMethod::aLGW || method == PairwiseMethod::aLPGW) {
        if (pair_auto_reference) {
          reference = build_auto_reference(raw, labels, pair_support,
                                           pair_flags);
          reference_id = "auto_barycenter";
        } else if (!pair_reference.empty()) {
          reference = load_reference(pair_reference, manifest.gauge_kind,
                                     pair_header);
          reference_id = fs::path(pair_reference).stem().string();
        } else {
          throw InputError("embedding methods need --reference or "
                           "--auto-reference");
        }
      }

      PairwiseOptions options;
      options.method = method;
      options.lambda = pair_lambda;
      options.reference = reference ? &*reference : nullptr;
      options.reference_id = reference_id;
      options.fw = pair_flags.config();
      options.jobs = pair_jobs;
      const auto dm = pairwise(shapes, ids, options);
      save_distance_matrix(dm, pair_out);
      std::cout << "method " << to_string(dm.method) << ": "
                << dm.solver_calls << " solver calls, "
                << dm.wall_clock_seconds << " s; wrote " << pair_out << "\n";
    } else if (eval->parsed()) {
      const auto exact = load_distance_matrix(eval_exact);
      const auto linear = load_distance_matrix(eval_linear);
      const auto report = eval_mre_pcc(exact, linear, eval_floor);
      nlohmann::json j;
      j["mre"] = report.mre;
      j["pcc"] = report.pcc;
      j["pairs"] = report.per_pair_rows.size();
      auto rows = nlohmann::json::array();
      for (const auto& row : report.per_pair_rows)
        rows.push_back({{"i", row.i},
                        {"j", row.j},
                        {"exact_sq", row.exact_sq},
                        {"linear_sq", row.linear_sq},
                        {"rel_err", row.rel_err}});
      j["per_pair"] = std::move(rows);
      write_json(j, eval_out);
      std::cout << "MRE " << report.mre << ", PCC " << report.pcc
                << "; wrote " << eval_out << "\n";
    } else if (knn->parsed()) {
      const auto dm = load_distance_matrix(knn_matrix);
      std::vector<std::string> ids, labels;
      load_manifest_shapes(knn_manifest, &ids, &labels);
      if (ids != dm.ids)
        throw InputError("matrix ids do not match the manifest");
      const auto result = knn_classify(dm, labels, knn_trials, knn_seed);
      nlohmann::json j;
      j["accuracy"] = result.accuracy;
      j["classes"] = result.class_names;
      auto confusion = nlohmann::json::array();
      for (Eigen::Index i = 0; i < result.confusion.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < result.confusion.cols(); ++c)
          row.push_back(result.confusion(i, c));
        confusion.push_back(std::move(row));
      }
      j["confusion"] = std::move(confusion);
      write_json(j, knn_out);
      std::cout << "accuracy " << result.accuracy << "; wrote " << knn_out
                << "\n";
    } else if (kernel->parsed()) {
      export_kernel(load_distance_matrix(kernel_matrix), kernel_sigma,
                    kernel_out);
      std::cout << "wrote " << kernel_out << "\n";
    }
  } catch (const InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 2;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "failure: " << err.what() << "\n";
    return 3;
  }
  return 0;
}

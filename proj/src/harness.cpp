#include "pgw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;

namespace pgw {

std::string to_string(PairwiseMethod method) {
  switch (method) {
    case PairwiseMethod::GW: return "gw";
    case PairwiseMethod::PGW: return "pgw";
    case PairwiseMethod::aLGW: return "algw";
    case PairwiseMethod::aLPGW: return "alpgw";
  }
  return "unknown";
}

PairwiseMethod pairwise_method_from_string(const std::string& name) {
  if (name == "gw") return PairwiseMethod::GW;
  if (name == "pgw") return PairwiseMethod::PGW;
  if (name == "algw") return PairwiseMethod::aLGW;
  if (name == "alpgw") return PairwiseMethod::aLPGW;
  throw InputError("unknown method: " + name);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body) {
  if (jobs <= 0)
    jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int spawn = std::min<int>(jobs, static_cast<int>(count));
  for (int w = 0; w < spawn; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Eigen::MatrixXd sample_ellipse(int n, double a, double b, double angle,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd pts(n, 2);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(unit(rng));
    const double phi = 2.0 * M_PI * unit(rng);
    const double x = a * r * std::cos(phi);
    const double y = b * r * std::sin(phi);
    pts(i, 0) = ca * x - sa * y;
    pts(i, 1) = sa * x + ca * y;
  }
  return pts;
}

Eigen::MatrixXd sample_annulus(int n, double r_inner, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd pts(n, 2);
  const double r2 = r_inner * r_inner;
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(r2 + unit(rng) * (1.0 - r2));
    const double phi = 2.0 * M_PI * unit(rng);
    pts(i, 0) = r * std::cos(phi);
    pts(i, 1) = r * std::sin(phi);
  }
  return pts;
}

Manifest gen_ellipses(int count, int n_min, int n_max, std::uint64_t seed,
                      const std::string& out_dir) {
  if (count < 1) throw InputError("count must be at least 1");
  if (n_min < 3) throw InputError("n_min must be at least 3");
  if (n_max < n_min) throw InputError("n_max must be >= n_min");
  fs::create_directories(out_dir);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(n_min, n_max);
  std::uniform_real_distribution<double> axis_dist(0.3, 1.0);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * M_PI);

  Manifest manifest;
  manifest.gauge_kind = GaugeKind::SquaredEuclidean;
  for (int k = 0; k < count; ++k) {
    const int n = size_dist(rng);
    const double a = axis_dist(rng);
    const double b = axis_dist(rng);
    const double angle = angle_dist(rng);
    const Eigen::MatrixXd pts = sample_ellipse(n, a, b, angle, rng);
    const Eigen::VectorXd mass = Eigen::VectorXd::Constant(n, 1.0 / n);
    const GmSpace shape = normalize_scale(
        GmSpace::from_points(pts, mass, GaugeKind::SquaredEuclidean));

    char name[64];
    std::snprintf(name, sizeof(name), "ellipse_%03d", k);
    const std::string file = std::string(name) + ".csv";
    write_pointcloud(shape, (fs::path(out_dir) / file).string());
    manifest.shapes.push_back({name, file, "ellipse"});
  }
  write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  return manifest;
}

GmSpace corrupt_with_noise(const GmSpace& space, double eta,
                           std::uint64_t seed) {
  if (eta < 0.0) throw InputError("eta must be nonnegative");
  if (!space.has_points()) throw InputError("corruption needs points");
  if (eta == 0.0) return space;

  const Eigen::Index n = space.size();
  const Eigen::Index added =
      static_cast<Eigen::Index>(std::ceil(eta * static_cast<double>(n)));
  const double total = space.total_mass();
  const double per_point = total / static_cast<double>(n);

  const Eigen::RowVectorXd lo = space.points().colwise().minCoeff();
  const Eigen::RowVectorXd hi = space.points().colwise().maxCoeff();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd pts(n + added, space.dim());
  pts.topRows(n) = space.points();
  Eigen::VectorXd mass(n + added);
  mass.head(n) = space.mass();
  for (Eigen::Index i = 0; i < added; ++i) {
    for (Eigen::Index d = 0; d < space.dim(); ++d)
      pts(n + i, d) = lo[d] + unit(rng) * (hi[d] - lo[d]);
    mass[n + i] = per_point;
  }
  // trim the last point so the added mass is exactly eta * total
  mass[n + added - 1] =
      eta * total - per_point * static_cast<double>(added - 1);
  return GmSpace::from_points(pts, mass, space.kind());
}

std::vector<GmSpace> apply_mass_convention(const std::vector<GmSpace>& spaces,
                                           PairwiseMethod method) {
  std::vector<GmSpace> out;
  out.reserve(spaces.size());
  if (method == PairwiseMethod::GW || method == PairwiseMethod::aLGW) {
    for (const GmSpace& s : spaces) out.push_back(normalize_mass(s, 1.0));
    return out;
  }
  std::vector<Eigen::Index> sizes;
  for (const GmSpace& s : spaces) sizes.push_back(s.size());
  std::sort(sizes.begin(), sizes.end());
  const double median = static_cast<double>(sizes[sizes.size() / 2]);
  for (const GmSpace& s : spaces)
    out.push_back(
        normalize_mass(s, static_cast<double>(s.size()) / median));
  return out;
}

DistanceMatrix pairwise(const std::vector<GmSpace>& spaces,
                        const std::vector<std::string>& ids,
                        const PairwiseOptions& options) {
  const std::size_t k = spaces.size();
  if (k < 2) throw InputError("pairwise needs at least two shapes");
  if (ids.size() != k) throw InputError("id/shape count mismatch");
  const bool embedded = options.method == PairwiseMethod::aLGW ||
                        options.method == PairwiseMethod::aLPGW;
  const bool partial = options.method == PairwiseMethod::PGW ||
                       options.method == PairwiseMethod::aLPGW;
  if (embedded && options.reference == nullptr)
    throw InputError("embedding methods need a reference space");
  if (partial && !options.lambda)
    throw InputError("partial methods need lambda");

  DistanceMatrix dm;
  dm.ids = ids;
  dm.method = options.method;
  dm.lambda = options.lambda;
  if (embedded) dm.reference_id = options.reference_id;
  dm.squared = Eigen::MatrixXd::Zero(k, k);

  const std::uint64_t calls_before = solver_call_count();
  const auto t0 = std::chrono::steady_clock::now();

  if (!embedded) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    std::vector<double> results(pairs.size());
    parallel_for(pairs.size(), options.jobs, [&](std::size_t t) {
      const auto [i, j] = pairs[t];
      results[t] =
          partial
              ? solve_pgw(spaces[i], spaces[j], *options.lambda, options.fw)
                    .second.objective
              : solve_gw(spaces[i], spaces[j], options.fw).second.objective;
    });
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      const auto [i, j] = pairs[t];
      dm.squared(i, j) = dm.squared(j, i) = results[t];
    }
  } else if (options.method == PairwiseMethod::aLPGW) {
    std::vector<LpgwEmbedding> embeddings(k);
    parallel_for(k, options.jobs, [&](std::size_t i) {
      embeddings[i] = embed_lpgw(*options.reference, spaces[i],
                                 *options.lambda, options.fw,
                                 options.reference_id);
    });
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        dm.squared(i, j) = dm.squared(j, i) =
            alpgw_distance(embeddings[i], embeddings[j]);
  } else {
    std::vector<LgwEmbedding> embeddings(k);
    parallel_for(k, options.jobs, [&](std::size_t i) {
      embeddings[i] = embed_lgw(*options.reference, spaces[i], options.fw,
                                options.reference_id);
    });
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        dm.squared(i, j) = dm.squared(j, i) =
            algw_distance(embeddings[i], embeddings[j]);
  }

  dm.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  dm.solver_calls =
      static_cast<std::int64_t>(solver_call_count() - calls_before);
  dm.values = dm.squared.cwiseMax(0.0).cwiseSqrt();
  return dm;
}

EvalReport eval_mre_pcc(const DistanceMatrix& exact,
                        const DistanceMatrix& linearized, double floor) {
  if (exact.ids != linearized.ids)
    throw InputError("distance matrices cover different shapes");
  const Eigen::Index k = exact.squared.rows();

  EvalReport report;
  std::vector<double> xs, ys;
  double err_sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double ex = exact.squared(i, j);
      if (!(ex > floor)) continue;
      const double lin = linearized.squared(i, j);
      const double rel = std::abs(ex - lin) / ex;
      report.per_pair_rows.push_back({i, j, ex, lin, rel});
      err_sum += rel;
      xs.push_back(ex);
      ys.push_back(lin);
    }
  if (xs.empty())
    throw InputError("no pairs above the floor; nothing to evaluate");

  const double count = static_cast<double>(xs.size());
  report.mre = err_sum / count;

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    sxx += (xs[t] - mx) * (xs[t] - mx);
    syy += (ys[t] - my) * (ys[t] - my);
    sxy += (xs[t] - mx) * (ys[t] - my);
  }
  if (sxx > 0.0 && syy > 0.0)
    report.pcc = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  else if (sxx == 0.0 && syy == 0.0)
    report.pcc = (mx == my) ? 1.0 : 0.0;
  else
    report.pcc = 0.0;
  return report;
}

KnnResult knn_classify(const DistanceMatrix& dm,
                       const std::vector<std::string>& labels, int trials,
                       std::uint64_t seed) {
  const std::size_t k = dm.ids.size();
  if (labels.size() != k) throw InputError("label/shape count mismatch");
  if (trials < 1) throw InputError("trials must be at least 1");

  KnnResult result;
  for (const std::string& label : labels)
    if (std::find(result.class_names.begin(), result.class_names.end(),
                  label) == result.class_names.end())
      result.class_names.push_back(label);
  const std::size_t c = result.class_names.size();
  if (c < 2) throw InputError("need at least two classes");

  std::vector<std::vector<std::size_t>> members(c);
  std::vector<std::size_t> class_of(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t ci = static_cast<std::size_t>(
        std::find(result.class_names.begin(), result.class_names.end(),
                  labels[i]) -
        result.class_names.begin());
    members[ci].push_back(i);
    class_of[i] = ci;
  }
  bool warned_singleton = false;
  for (std::size_t ci = 0; ci < c; ++ci)
    if (members[ci].size() < 2 && !warned_singleton) {
      std::cerr << "[pgw] warning: class '" << result.class_names[ci]
                << "' has a single member; it yields no test items when "
                   "drawn as representative\n";
      warned_singleton = true;
    }

  result.confusion = Eigen::MatrixXd::Zero(c, c);
  std::mt19937_64 rng(seed);
  double accuracy_sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::size_t> reps(c);
    for (std::size_t ci = 0; ci < c; ++ci) {
      std::uniform_int_distribution<std::size_t> pick(0, members[ci].size() - 1);
      reps[ci] = members[ci][pick(rng)];
    }
    std::size_t correct = 0, tested = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (std::find(reps.begin(), reps.end(), i) != reps.end()) continue;
      std::size_t best_class = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double d = dm.values(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(reps[ci]));
        if (d < best_dist ||
            (d == best_dist && reps[ci] < reps[best_class])) {
          best_dist = d;
          best_class = ci;
        }
      }
      result.confusion(static_cast<Eigen::Index>(class_of[i]),
                       static_cast<Eigen::Index>(best_class)) += 1.0;
      ++tested;
      if (best_class == class_of[i]) ++correct;
    }
    if (tested > 0)
      accuracy_sum += static_cast<double>(correct) / static_cast<double>(tested);
  }
  result.accuracy = accuracy_sum / static_cast<double>(trials);
  result.confusion /= static_cast<double>(trials);
  return result;
}

void export_kernel(const DistanceMatrix& dm, double sigma,
                   const std::string& path) {
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  const double lo = dm.values.minCoeff(), hi = dm.values.maxCoeff();
  Eigen::MatrixXd normalized;
  if (hi > lo)
    normalized = (dm.values.array() - lo) / (hi - lo);
  else
    normalized = Eigen::MatrixXd::Zero(dm.values.rows(), dm.values.cols());
  const Eigen::MatrixXd kernel = (-sigma * normalized.array()).exp();
  write_matrix_csv(dm.ids, kernel, path);
}

// persistence ----------------------------------------------------------------

void write_manifest(const Manifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["gauge_kind"] = to_string(manifest.gauge_kind);
  auto shapes = nlohmann::json::array();
  for (const ManifestEntry& e : manifest.shapes)
    shapes.push_back({{"id", e.id}, {"path", e.path}, {"label", e.label}});
  j["shapes"] = std::move(shapes);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    Manifest manifest;
    manifest.gauge_kind =
        gauge_kind_from_string(j.at("gauge_kind").get<std::string>());
    for (const auto& s : j.at("shapes"))
      manifest.shapes.push_back({s.at("id").get<std::string>(),
                                 s.at("path").get<std::string>(),
                                 s.at("label").get<std::string>()});
    return manifest;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& err) {
    throw MalformedInputError(std::string("bad manifest: ") + err.what());
  }
}

std::vector<GmSpace> load_manifest_shapes(const std::string& manifest_path,
                                          std::vector<std::string>* ids,
                                          std::vector<std::string>* labels) {
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<GmSpace> spaces;
  for (const ManifestEntry& e : manifest.shapes) {
    fs::path p(e.path);
    if (p.is_relative()) p = base / p;
    spaces.push_back(read_pointcloud(p.string(), manifest.gauge_kind));
    if (ids) ids->push_back(e.id);
    if (labels) labels->push_back(e.label);
  }
  return spaces;
}

void write_matrix_csv(const std::vector<std::string>& ids,
                      const Eigen::MatrixXd& matrix, const std::string& path) {
  if (static_cast<Eigen::Index>(ids.size()) != matrix.rows() ||
      matrix.rows() != matrix.cols())
    throw InputError("id/matrix shape mismatch");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "id";
  for (const std::string& id : ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < matrix.cols(); ++j)
      out << ',' << format_double(matrix(i, j));
    out << '\n';
  }
  if (!out) throw InputError("write failed for " + path);
}

std::pair<std::vector<std::string>, Eigen::MatrixXd> read_matrix_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw MalformedInputError("empty matrix file " + path);

  std::vector<std::string> ids;
  {
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        if (cell != "id")
          throw MalformedInputError("matrix CSV must start with an id column");
        first = false;
      } else {
        ids.push_back(cell);
      }
    }
  }
  const Eigen::Index k = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd matrix(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!std::getline(in, line))
      throw MalformedInputError("truncated matrix file " + path);
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',') || cell != ids[static_cast<std::size_t>(i)])
      throw MalformedInputError("row/column id mismatch in " + path);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!std::getline(ss, cell, ','))
        throw MalformedInputError("short row in " + path);
      try {
        matrix(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw MalformedInputError("bad number '" + cell + "' in " + path);
      }
    }
  }
  return {std::move(ids), std::move(matrix)};
}

namespace {

std::string squared_path(const std::string& path) {
  fs::path p(path);
  fs::path with_suffix = p.parent_path() / (p.stem().string() + "_sq");
  with_suffix += p.extension();
  return with_suffix.string();
}

}  // namespace

void save_distance_matrix(const DistanceMatrix& dm, const std::string& path) {
  write_matrix_csv(dm.ids, dm.values, path);
  write_matrix_csv(dm.ids, dm.squared, squared_path(path));
  nlohmann::json meta;
  meta["method"] = to_string(dm.method);
  if (dm.lambda) meta["lambda"] = *dm.lambda;
  if (dm.reference_id) meta["reference_id"] = *dm.reference_id;
  meta["solver_calls"] = dm.solver_calls;
  std::ofstream out(path + ".meta.json");
  if (!out) throw InputError("cannot write " + path + ".meta.json");
  out << meta.dump(2) << '\n';
}

DistanceMatrix load_distance_matrix(const std::string& path) {
  DistanceMatrix dm;
  auto [ids, values] = read_matrix_csv(path);
  dm.ids = std::move(ids);
  dm.values = std::move(values);
  const std::string sq = squared_path(path);
  if (fs::exists(sq)) {
    auto [sq_ids, sq_values] = read_matrix_csv(sq);
    if (sq_ids != dm.ids)
      throw MalformedInputError("id mismatch between " + path + " and " + sq);
    dm.squared = std::move(sq_values);
  } else {
    dm.squared = dm.values.cwiseProduct(dm.values);
  }
  const std::string meta_path = path + ".meta.json";
  if (fs::exists(meta_path)) {
    std::ifstream in(meta_path);
    nlohmann::json meta;
    try {
      in >> meta;
      dm.method = pairwise_method_from_string(meta.at("method").get<std::string>());
      if (meta.contains("lambda")) dm.lambda = meta["lambda"].get<double>();
      if (meta.contains("reference_id"))
        dm.reference_id = meta["reference_id"].get<std::string>();
      if (meta.contains("solver_calls"))
        dm.solver_calls = meta["solver_calls"].get<std::int64_t>();
    } catch (const std::exception& err) {
      throw MalformedInputError(std::string("bad meta file: ") + err.what());
    }
  }
  return dm;
}

}  // namespace pgw

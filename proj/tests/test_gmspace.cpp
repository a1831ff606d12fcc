#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "pgw/gmspace.hpp"

using namespace pgw;

namespace {

Eigen::MatrixXd points2(std::initializer_list<std::pair<double, double>> pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [x, y] : pts) {
    m(i, 0) = x;
    m(i, 1) = y;
    ++i;
  }
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("squared-Euclidean gauge from points") {
  const auto s = GmSpace::from_points(points2({{0, 0}, {1, 0}}), vec({0.5, 0.5}),
                                      GaugeKind::SquaredEuclidean);
  CHECK(s.gauge()(0, 0) == 0.0);
  CHECK(s.gauge()(1, 1) == 0.0);
  CHECK(s.gauge()(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.gauge()(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("inner-product gauge") {
  const auto one = GmSpace::from_points(points2({{0, 0}}), vec({1.0}),
                                        GaugeKind::InnerProduct);
  CHECK(one.gauge()(0, 0) == 0.0);

  const auto s = GmSpace::from_points(points2({{1, 0}, {0, 1}}), vec({1, 1}),
                                      GaugeKind::InnerProduct);
  CHECK(s.gauge()(0, 0) == doctest::Approx(1.0));
  CHECK(s.gauge()(0, 1) == doctest::Approx(0.0));
  CHECK(s.gauge()(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(GmSpace::from_points(points2({{0, 0}}), vec({1, 1}),
                                       GaugeKind::SquaredEuclidean),
                  InputError);
  CHECK_THROWS_AS(GmSpace::from_points(points2({{0, 0}}), vec({-1.0}),
                                       GaugeKind::SquaredEuclidean),
                  InputError);
  CHECK_THROWS_AS(GmSpace::from_points(points2({{0, 0}}), vec({1.0}),
                                       GaugeKind::Precomputed),
                  InputError);
  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 2, 0;
  CHECK_THROWS_AS(GmSpace::from_gauge(asym, vec({1, 1})), InputError);
}

TEST_CASE("normalize_scale") {
  const auto s = GmSpace::from_points(points2({{0, 0}, {2, 0}}), vec({1, 1}),
                                      GaugeKind::SquaredEuclidean);
  const auto scaled = normalize_scale(s);
  CHECK(scaled.points()(1, 0) == doctest::Approx(1.0));
  CHECK(scaled.gauge().maxCoeff() == doctest::Approx(1.0));

  // idempotent
  const auto twice = normalize_scale(scaled);
  CHECK((twice.points() - scaled.points()).cwiseAbs().maxCoeff() <= 1e-12);

  // 3-4-5 triangle scaling
  const auto t = normalize_scale(GmSpace::from_points(
      points2({{0, 0}, {3, 4}}), vec({1, 1}), GaugeKind::SquaredEuclidean));
  CHECK(std::sqrt(t.gauge().maxCoeff()) == doctest::Approx(1.0));
  CHECK(t.points()(1, 0) == doctest::Approx(3.0 / 5.0));

  const auto degenerate = GmSpace::from_points(
      points2({{1, 1}, {1, 1}}), vec({1, 1}), GaugeKind::SquaredEuclidean);
  CHECK_THROWS_AS(normalize_scale(degenerate), NoScaleError);
}

TEST_CASE("normalize_scale commutes with rotations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd pts(6, 2);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = coord(rng);
    const double theta = coord(rng);
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Eigen::VectorXd mass = Eigen::VectorXd::Constant(6, 1.0 / 6.0);

    const auto plain = normalize_scale(
        GmSpace::from_points(pts, mass, GaugeKind::SquaredEuclidean));
    const auto rotated = normalize_scale(GmSpace::from_points(
        pts * rot.transpose(), mass, GaugeKind::SquaredEuclidean));
    CHECK((plain.gauge() - rotated.gauge()).cwiseAbs().maxCoeff() <= 1e-10);

    // normalized squared-Euclidean gauges live in [0, 1]
    CHECK(plain.gauge().minCoeff() >= 0.0);
    CHECK(plain.gauge().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("normalize_mass") {
  const auto s = GmSpace::from_points(points2({{0, 0}, {1, 0}}), vec({2, 2}),
                                      GaugeKind::SquaredEuclidean);
  CHECK(normalize_mass(s, 1.0).mass()[0] == doctest::Approx(0.5));

  const auto t = GmSpace::from_points(points2({{0, 0}, {1, 0}}), vec({1, 3}),
                                      GaugeKind::SquaredEuclidean);
  const auto tn = normalize_mass(t, 2.0);
  CHECK(tn.mass()[0] == doctest::Approx(0.5));
  CHECK(tn.mass()[1] == doctest::Approx(1.5));

  const auto u = GmSpace::from_points(points2({{0, 0}, {1, 0}, {0, 1}}),
                                      vec({0.1, 0.1, 0.1}),
                                      GaugeKind::SquaredEuclidean);
  CHECK(normalize_mass(u, 1.0).mass()[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("point-cloud CSV round trip") {
  const std::string path = temp_file("pgw_test_cloud.csv");
  {
    std::ofstream out(path);
    out << "0.0,0.0,0.5\n1.0,0.0,0.5\n";
  }
  const auto s = read_pointcloud(path, GaugeKind::SquaredEuclidean);
  CHECK(s.size() == 2);
  CHECK(s.dim() == 2);
  CHECK(s.mass()[0] == 0.5);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Eigen::MatrixXd pts(5, 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = coord(rng);
  Eigen::VectorXd mass(5);
  for (Eigen::Index i = 0; i < 5; ++i) mass[i] = 0.1 + i * 0.05;
  const auto original = GmSpace::from_points(pts, mass, GaugeKind::SquaredEuclidean);
  write_pointcloud(original, path);
  const auto loaded = read_pointcloud(path, GaugeKind::SquaredEuclidean);
  CHECK((loaded.points() - original.points()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((loaded.mass() - original.mass()).cwiseAbs().maxCoeff() <= 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("malformed point-cloud files") {
  const std::string path = temp_file("pgw_test_bad.csv");
  {
    std::ofstream out(path);
  }
  CHECK_THROWS_AS(read_pointcloud(path, GaugeKind::SquaredEuclidean),
                  MalformedInputError);
  {
    std::ofstream out(path);
    out << "0.0,zero,1.0\n";
  }
  CHECK_THROWS_AS(read_pointcloud(path, GaugeKind::SquaredEuclidean),
                  MalformedInputError);
  {
    std::ofstream out(path);
    out << "0.0,0.0,1.0\n1.0,2.0,3.0,1.0\n";
  }
  CHECK_THROWS_AS(read_pointcloud(path, GaugeKind::SquaredEuclidean),
                  MalformedInputError);
  {
    std::ofstream out(path);
    out << "0.0,0.0,-1.0\n";
  }
  CHECK_THROWS_AS(read_pointcloud(path, GaugeKind::SquaredEuclidean),
                  InputError);
  {
    std::ofstream out(path);
    out << "x,y,mass\n0.5,0.5,1.0\n";
  }
  const auto s = read_pointcloud(path, GaugeKind::SquaredEuclidean, true);
  CHECK(s.size() == 1);
  std::filesystem::remove(path);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynbc/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace dynbc;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("disk quadrature reproduces area and circumference") {
  const Mesh mesh = build_disk_mesh(16, 64, 1.0);
  CHECK(mesh.boundary_weights.sum() == doctest::Approx(2 * pi).epsilon(1e-12));
  CHECK(std::abs(mesh.bulk_weights.sum() - pi) < 1e-2);
  CHECK(mesh.bulk_weights.minCoeff() > 0.0);
  CHECK(mesh.n_bulk() == 1 + 16 * 64);
  CHECK(mesh.n_boundary() == 64);
}

TEST_CASE("interval quadrature is exact") {
  const Mesh mesh = build_interval_mesh(200, 1.5);
  CHECK(mesh.bulk_weights.sum() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(mesh.boundary_weights.sum() == 2.0);
}

TEST_CASE("trace of the constant field is constant") {
  for (const Mesh& mesh : {build_disk_mesh(8, 24, 2.0), build_interval_mesh(10, 1.0)}) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.n_bulk());
    const Eigen::VectorXd tr = mesh.trace(ones);
    CHECK(tr.size() == mesh.n_boundary());
    CHECK((tr.array() - 1.0).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("invalid resolutions are rejected") {
  CHECK_THROWS_AS(build_interval_mesh(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_interval_mesh(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_disk_mesh(1, 64, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_disk_mesh(16, 64, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_disk_mesh(16, 64, -1.0), std::invalid_argument);
}

TEST_CASE("area error at least halves under refinement") {
  // area sums are exact by construction; check the trace-ring alignment of a
  // generic smooth integrand instead
  auto integrate = [](const Mesh& mesh) {
    double acc = 0.0;
    for (int i = 0; i < mesh.n_bulk(); ++i)
      acc += mesh.bulk_weights[i] * std::exp(-mesh.bulk_nodes.row(i).squaredNorm());
    return acc;
  };
  const double exact = pi * (1.0 - std::exp(-1.0));
  const double coarse = std::abs(integrate(build_disk_mesh(8, 32, 1.0)) - exact);
  const double fine = std::abs(integrate(build_disk_mesh(16, 64, 1.0)) - exact);
  CHECK(fine <= coarse / 2);
}

TEST_CASE("control mask on the disk") {
  const Mesh mesh = build_disk_mesh(16, 64, 1.0);
  const ControlRegion region = control_mask(mesh, DiskRegion{0.0, 0.0, 0.5});

  CHECK(region.indicator[0] == 1.0);  // origin
  // a node at radius 0.9375 (ring 15)
  const int outer = 1 + 14 * 64;
  CHECK(region.indicator[outer] == 0.0);
  // nodal indicators carry an O(h) boundary-alignment error; at n_r = 16 the
  // region boundary r = 0.5 sits exactly on a ring, giving the half-cell gap
  CHECK(std::abs(region.measure(mesh) - pi / 4) < 0.11);
  for (int k : mesh.boundary_to_bulk) CHECK(region.indicator[k] == 0.0);
}

TEST_CASE("regions touching the boundary are rejected") {
  const Mesh mesh = build_disk_mesh(16, 64, 1.0);
  CHECK_THROWS_AS(control_mask(mesh, DiskRegion{0.0, 0.0, 1.2}), std::invalid_argument);
  CHECK_THROWS_AS(control_mask(mesh, DiskRegion{0.6, 0.0, 0.5}), std::invalid_argument);
  const Mesh iv = build_interval_mesh(50, 1.0);
  CHECK_THROWS_AS(control_mask(iv, IntervalRegion{0.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(control_mask(iv, IntervalRegion{0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("empty regions are rejected") {
  const Mesh mesh = build_disk_mesh(8, 16, 1.0);
  // radius below the innermost quadrature cell and away from any node
  CHECK_THROWS_AS(control_mask(mesh, DiskRegion{0.19, 0.0, 0.01}), std::invalid_argument);
}

TEST_CASE("mask monotone in the descriptor") {
  const Mesh mesh = build_disk_mesh(12, 32, 1.0);
  const ControlRegion small = control_mask(mesh, DiskRegion{0.1, 0.0, 0.3});
  const ControlRegion big = control_mask(mesh, DiskRegion{0.1, 0.0, 0.6});
  CHECK(((big.indicator - small.indicator).array() >= 0.0).all());
}

TEST_CASE("shrink_region keeps the center") {
  const RegionSpec half = shrink_region(DiskRegion{0.2, -0.1, 0.4});
  const auto& d = std::get<DiskRegion>(half);
  CHECK(d.cx == 0.2);
  CHECK(d.radius == doctest::Approx(0.2));
  const RegionSpec seg = shrink_region(IntervalRegion{0.2, 0.6});
  const auto& s = std::get<IntervalRegion>(seg);
  CHECK(s.left == doctest::Approx(0.3));
  CHECK(s.right == doctest::Approx(0.5));
}

TEST_CASE("mesh csv dump") {
  const Mesh mesh = build_interval_mesh(4, 1.0);
  const std::string path = "/tmp/dynbc_test_mesh.csv";
  mesh.dump_csv(path);
  std::FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f);
  char line[256];
  REQUIRE(std::fgets(line, sizeof line, f));
  CHECK(std::string(line) == "id,x,y,weight,is_boundary\n");
  int rows = 0;
  while (std::fgets(line, sizeof line, f)) ++rows;
  std::fclose(f);
  CHECK(rows == mesh.n_bulk());
  std::remove(path.c_str());
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynbc/carleman.hpp"
#include "dynbc/fields.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace dynbc;

namespace {
constexpr double pi = std::numbers::pi;

L2Pair random_pair(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  L2Pair z = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i) z.bulk[i] = gauss(rng);
  for (int k = 0; k < mesh.n_boundary(); ++k) z.surface[k] = gauss(rng);
  return z;
}
}  // namespace

TEST_CASE("pair inner product on constants") {
  const Mesh mesh = build_disk_mesh(16, 64, 1.0);
  const L2Pair ones = L2Pair::constant(mesh, 1.0, 1.0);
  CHECK(std::abs(inner(ones, ones, mesh) - 3 * pi) < 1e-2);

  L2Pair b = ones;
  b.surface.setZero();
  CHECK(inner(ones, b, mesh) == doctest::Approx(mesh.bulk_weights.sum()));
}

TEST_CASE("inner product is symmetric and positive") {
  const Mesh mesh = build_disk_mesh(6, 16, 1.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const L2Pair a = random_pair(mesh, rng);
    const L2Pair b = random_pair(mesh, rng);
    CHECK(inner(a, b, mesh) == inner(b, a, mesh));
    // Cauchy-Schwarz
    CHECK(inner(a, b, mesh) * inner(a, b, mesh) <=
          inner(a, a, mesh) * inner(b, b, mesh) * (1 + 1e-12));
  }
  CHECK(inner(L2Pair::zero(mesh), L2Pair::zero(mesh), mesh) == 0.0);
  // strictly positive quadrature weights make the norm definite
  L2Pair spike = L2Pair::zero(mesh);
  spike.bulk[mesh.n_bulk() / 2] = 1e-8;
  CHECK(inner(spike, spike, mesh) > 0.0);
}

TEST_CASE("size mismatch is an error") {
  const Mesh mesh = build_disk_mesh(4, 8, 1.0);
  L2Pair a = L2Pair::constant(mesh, 1.0, 1.0);
  L2Pair bad = a;
  bad.bulk.resize(3);
  CHECK_THROWS_AS(inner(a, bad, mesh), std::invalid_argument);
}

TEST_CASE("weighted time norm with unit weight") {
  const Mesh mesh = build_disk_mesh(16, 64, 1.0);
  Trajectory tr = Trajectory::zero(mesh, 1.0, 20);
  for (auto& s : tr.states) s = L2Pair::constant(mesh, 1.0, 1.0);
  const SpaceTimeWeight one = [&mesh](double) { return L2Pair::constant(mesh, 1.0, 1.0); };
  CHECK(std::abs(weighted_time_norm_sq(tr, one, mesh) - 3 * pi) < 1e-2);

  Trajectory zero = Trajectory::zero(mesh, 1.0, 20);
  CHECK(weighted_time_norm_sq(zero, one, mesh) == 0.0);
}

TEST_CASE("non-finite weights: endpoints drop, interior throws") {
  const Mesh mesh = build_interval_mesh(8, 1.0);
  Trajectory tr = Trajectory::zero(mesh, 1.0, 10);
  for (auto& s : tr.states) s = L2Pair::constant(mesh, 1.0, 1.0);

  const SpaceTimeWeight singular_ends = [&mesh](double t) {
    const double w = 1.0 / (t * (1.0 - t));
    return L2Pair::constant(mesh, w, w);
  };
  CHECK(std::isfinite(weighted_time_norm_sq(tr, singular_ends, mesh)));

  const SpaceTimeWeight bad_interior = [&mesh](double t) {
    const double w = (std::abs(t - 0.5) < 1e-9) ? std::numeric_limits<double>::infinity() : 1.0;
    return L2Pair::constant(mesh, w, w);
  };
  CHECK_THROWS_AS(weighted_time_norm_sq(tr, bad_interior, mesh), std::invalid_argument);
}

TEST_CASE("singular carleman weight norm matches a refined time quadrature") {
  // trajectory y = exp(-s alpha~) so the weighted integrand is xi~^{-3},
  // smooth up to t = T where it vanishes; T = 2 keeps the bare weight
  // representable at the finest grid's last interior node
  const double T = 2.0;
  const Mesh mesh = build_disk_mesh(6, 16, 1.0);
  const ControlRegion omega_prime = control_mask(mesh, DiskRegion{0, 0, 0.3});
  const CarlemanWeights cw = make_weights(mesh, build_eta0(mesh, omega_prime), 1.0, 1.0, 1.01, T);

  auto build = [&](int steps) {
    Trajectory tr = Trajectory::zero(mesh, T, steps);
    for (int m = 0; m <= steps; ++m) {
      const double t = tr.time(m);
      for (int i = 0; i < mesh.n_bulk(); ++i)
        tr.at(m).bulk[i] =
            t >= T ? 0.0 : std::exp(-cw.s * cw.alpha_tilde(t, cw.eta0[i]));
      for (int k = 0; k < mesh.n_boundary(); ++k)
        tr.at(m).surface[k] = t >= T ? 0.0 : std::exp(-cw.s * cw.alpha_tilde(t, 0.0));
    }
    return tr;
  };
  const SpaceTimeWeight w = [&](double t) {
    L2Pair out = L2Pair::zero(mesh);
    if (t >= T) {
      out.bulk.setConstant(std::numeric_limits<double>::infinity());
      return out;  // singular endpoint, dropped by convention
    }
    for (int i = 0; i < mesh.n_bulk(); ++i)
      out.bulk[i] = std::exp(cw.s * cw.alpha_tilde(t, cw.eta0[i])) *
                    std::pow(cw.xi_tilde(t, cw.eta0[i]), -1.5);
    for (int k = 0; k < mesh.n_boundary(); ++k)
      out.surface[k] = std::exp(cw.s * cw.alpha_tilde(t, 0.0)) * std::pow(cw.xi_tilde(t, 0.0), -1.5);
    return out;
  };

  const double coarse = weighted_time_norm_sq(build(32), w, mesh);
  const double fine = weighted_time_norm_sq(build(256), w, mesh);
  CHECK(std::abs(coarse - fine) <= 0.01 * fine);
}

TEST_CASE("trajectory round trip through the binary dump") {
  const Mesh mesh = build_disk_mesh(4, 8, 1.0);
  std::mt19937_64 rng(9);
  Trajectory tr = Trajectory::zero(mesh, 2.0, 7);
  for (auto& s : tr.states) s = random_pair(mesh, rng);

  const std::string path = "/tmp/dynbc_test_traj.bin";
  write_trajectory_binary(tr, path);
  const Trajectory back = read_trajectory_binary(path);
  REQUIRE(back.steps() == tr.steps());
  CHECK(back.horizon == tr.horizon);
  for (int m = 0; m <= tr.steps(); ++m) {
    CHECK((back.at(m).bulk - tr.at(m).bulk).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.at(m).surface - tr.at(m).surface).cwiseAbs().maxCoeff() == 0.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("trajectory csv has the long format header") {
  const Mesh mesh = build_interval_mesh(3, 1.0);
  Trajectory tr = Trajectory::zero(mesh, 1.0, 2);
  const std::string path = "/tmp/dynbc_test_traj.csv";
  write_trajectory_csv(tr, path);
  std::FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f);
  char line[128];
  REQUIRE(std::fgets(line, sizeof line, f));
  CHECK(std::string(line) == "t,node_id,component,value\n");
  std::fclose(f);
  std::remove(path.c_str());
}

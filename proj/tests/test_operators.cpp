#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynbc/operators.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace dynbc;

namespace {

L2Pair random_pair(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  L2Pair z = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i) z.bulk[i] = gauss(rng);
  for (int k = 0; k < mesh.n_boundary(); ++k) z.surface[k] = gauss(rng);
  return z;
}

double bisect(double lo, double hi, const std::function<double(double)>& f) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2, fm = f(mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("constants lie in the kernel of A") {
  for (const Mesh& mesh : {build_disk_mesh(10, 32, 1.0), build_interval_mesh(40, 1.0)}) {
    const DiscreteOperator op = assemble(mesh, 1.3, mesh.kind == MeshKind::disk ? 0.7 : 0.0);
    const L2Pair ones = L2Pair::constant(mesh, 1.0, 1.0);
    const L2Pair ay = apply_operator(op, PotentialPair::zero(), 0.0, ones);
    CHECK(ay.bulk.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ay.surface.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("A on the radial quadratic") {
  const Mesh mesh = build_disk_mesh(16, 64, 1.0);
  const double d = 2.0;
  const DiscreteOperator op = assemble(mesh, d, 1.0);
  L2Pair y = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i) y.bulk[i] = 1.0 - mesh.bulk_nodes.row(i).squaredNorm();
  const L2Pair ay = apply_operator(op, PotentialPair::zero(), 0.0, y);

  // interior rows reproduce d * Delta exactly for this quadratic
  for (int i = 0; i < mesh.n_bulk(); ++i)
    if (!mesh.is_boundary_bulk_node(i)) CHECK(ay.bulk[i] == doctest::Approx(-4 * d).epsilon(1e-9));
  // the boundary row carries the surface equation plus an O(h) share of the
  // bulk row through the lumped trace coupling: -d dnu y = +2d up to ~3h/2
  const double h = mesh.spacing();
  for (int k = 0; k < mesh.n_boundary(); ++k) {
    CHECK(ay.surface[k] < 2 * d);
    CHECK(std::abs(ay.surface[k] - 2 * d) < 2 * d * 2.0 * h);
  }
}

TEST_CASE("A is self-adjoint in the pair inner product") {
  const Mesh mesh = build_disk_mesh(8, 24, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 0.5);
  const PotentialPair pot = PotentialPair::constants(mesh, 0.4, -0.3);
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    const L2Pair y = random_pair(mesh, rng);
    const L2Pair z = random_pair(mesh, rng);
    const double a = inner(apply_operator(op, pot, 0.0, y), z, mesh);
    const double b = inner(y, apply_operator(op, pot, 0.0, z), mesh);
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("apply_operator matches a dense assembly oracle") {
  const Mesh mesh = build_interval_mesh(12, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.7, 0.0);
  const PotentialPair pot = PotentialPair::constants(mesh, 0.8, -0.6);
  const int nb = mesh.n_bulk(), ns = mesh.n_boundary(), n = nb + ns;

  // dense pair-space matrix assembled column by column from unit pairs
  Eigen::MatrixXd dense(n, n);
  for (int j = 0; j < n; ++j) {
    L2Pair e = L2Pair::zero(mesh);
    if (j < nb)
      e.bulk[j] = 1.0;
    else
      e.surface[j - nb] = 1.0;
    const L2Pair col = apply_operator(op, pot, 0.0, e);
    dense.col(j).head(nb) = col.bulk;
    dense.col(j).tail(ns) = col.surface;
  }

  std::mt19937_64 rng(17);
  for (int p = 0; p < 5; ++p) {
    const L2Pair y = random_pair(mesh, rng);
    Eigen::VectorXd stacked(n);
    stacked.head(nb) = y.bulk;
    stacked.tail(ns) = y.surface;
    const Eigen::VectorXd expect = dense * stacked;
    const L2Pair got = apply_operator(op, pot, 0.0, y);
    CHECK((got.bulk - expect.head(nb)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((got.surface - expect.tail(ns)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("potentials reduce to A y when zero and shift constants") {
  const Mesh mesh = build_disk_mesh(6, 16, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 1.0);
  const L2Pair ones = L2Pair::constant(mesh, 1.0, 1.0);
  const PotentialPair pot = PotentialPair::constants(mesh, 1.0, 1.0);
  const L2Pair out = apply_operator(op, pot, 0.0, ones);
  CHECK(out.bulk.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((out.bulk.array() + 1.0).abs().maxCoeff() < 1e-12);
  CHECK((out.surface.array() + 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("mass functional annihilates the range of A") {
  const Mesh mesh = build_disk_mesh(8, 24, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 1.0);
  std::mt19937_64 rng(19);
  const L2Pair ones = L2Pair::constant(mesh, 1.0, 1.0);
  for (int p = 0; p < 10; ++p) {
    const L2Pair y = random_pair(mesh, rng);
    const L2Pair ay = apply_operator(op, PotentialPair::zero(), 0.0, y);
    CHECK(std::abs(inner(ones, ay, mesh)) < 1e-10);
  }
}

TEST_CASE("spectrum: kernel, nonnegativity, interval eigenvalue oracles") {
  const Mesh mesh = build_interval_mesh(200, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 0.0);
  const SpectrumResult spec = spectrum_smallest(op, 5);

  CHECK(std::abs(spec.values[0]) < 1e-10);
  CHECK(spec.values.minCoeff() > -1e-10);
  const double spread = spec.modes[0].bulk.maxCoeff() - spec.modes[0].bulk.minCoeff();
  CHECK(spread < 1e-7);

  // separation of variables gives two interleaved branches:
  //   antisymmetric modes: tan(mu/2) = 1/mu, symmetric modes: tan(mu/2) = -mu
  const double mu_anti =
      bisect(1e-6, std::numbers::pi - 1e-9, [](double mu) { return std::tan(mu / 2) - 1 / mu; });
  const double mu_sym = bisect(std::numbers::pi + 1e-9, 2 * std::numbers::pi - 1e-9,
                               [](double mu) { return std::tan(mu / 2) + mu; });
  CHECK(mu_sym == doctest::Approx(3.6732).epsilon(1e-3));
  CHECK(spec.values[1] == doctest::Approx(mu_anti * mu_anti).epsilon(0.01));
  CHECK(spec.values[2] == doctest::Approx(mu_sym * mu_sym).epsilon(0.01));
}

TEST_CASE("spectrum argument validation") {
  const Mesh mesh = build_interval_mesh(10, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 0.0);
  CHECK_THROWS_AS(spectrum_smallest(op, 0), std::invalid_argument);
  CHECK_THROWS_AS(spectrum_smallest(op, 100), std::invalid_argument);
}

TEST_CASE("assembly rejects bad diffusivities") {
  const Mesh mesh = build_disk_mesh(4, 8, 1.0);
  CHECK_THROWS_AS(assemble(mesh, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(assemble(mesh, 1.0, -0.5), std::invalid_argument);
  CHECK_NOTHROW(assemble(mesh, 1.0, 0.0));  // the solver itself accepts delta = 0
}

TEST_CASE("tabulated potentials enforce the declared bound") {
  const Mesh mesh = build_interval_mesh(4, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(mesh.n_bulk(), 3, 2.0);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(mesh.n_boundary(), 3);
  CHECK_THROWS_AS(PotentialPair::tabulated(mesh, 1.0, a, b, 1.0), std::invalid_argument);
  CHECK_NOTHROW(PotentialPair::tabulated(mesh, 1.0, a, b, 2.5));
}

TEST_CASE("triplet dump round-trips the stiffness entries") {
  const Mesh mesh = build_interval_mesh(4, 1.0);
  const DiscreteOperator op = assemble(mesh, 2.0, 0.0);
  const std::string kpath = "/tmp/dynbc_test_K.txt", mpath = "/tmp/dynbc_test_M.txt";
  dump_operator_triplets(op, kpath, mpath);
  std::FILE* f = std::fopen(kpath.c_str(), "r");
  REQUIRE(f);
  long row, col;
  double value, diag0 = 0;
  int entries = 0;
  while (std::fscanf(f, "%ld %ld %lf", &row, &col, &value) == 3) {
    ++entries;
    if (row == 0 && col == 0) diag0 = value;
  }
  std::fclose(f);
  CHECK(entries == op.stiffness.nonZeros());
  CHECK(diag0 == doctest::Approx(2.0 / mesh.spacing()));
  std::remove(kpath.c_str());
  std::remove(mpath.c_str());
}

TEST_CASE("trace compatibility of coupled round trips") {
  const Mesh mesh = build_disk_mesh(6, 16, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 1.0);
  std::mt19937_64 rng(23);
  const L2Pair y = random_pair(mesh, rng);
  const L2Pair coupled = op.from_coupled(op.to_coupled(y));
  CHECK((mesh.trace(coupled.bulk) - coupled.surface).cwiseAbs().maxCoeff() == 0.0);
  // projection is idempotent
  const L2Pair twice = op.from_coupled(op.to_coupled(coupled));
  CHECK((twice.bulk - coupled.bulk).cwiseAbs().maxCoeff() < 1e-15);
}

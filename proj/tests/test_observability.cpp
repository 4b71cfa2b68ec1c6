#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynbc/observability.hpp"

#include <random>

using namespace dynbc;

namespace {

struct Setup {
  Mesh mesh = build_disk_mesh(8, 24, 1.0);
  DiscreteOperator op = assemble(mesh, 1.0, 1.0);
  ControlRegion omega = control_mask(mesh, DiskRegion{0, 0, 0.5});
  EvolutionConfig cfg{1.0, 60, 0.5, 1e-10};
  PotentialPair none;
};

ControlRegion full_region(const Mesh& mesh) {
  ControlRegion r;
  r.indicator = Eigen::VectorXd::Ones(mesh.n_bulk());
  r.descriptor = DiskRegion{0, 0, 1.0};
  return r;
}

L2Pair random_pair(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  L2Pair z = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i) z.bulk[i] = gauss(rng);
  for (int k = 0; k < mesh.n_boundary(); ++k) z.surface[k] = gauss(rng);
  return z;
}

}  // namespace

TEST_CASE("full observation: the constant mode attains 1") {
  Setup s;
  ObservabilityParams params;
  params.seed = 5;
  const ObservabilityReport rep =
      estimate_backward_observability(s.op, s.none, full_region(s.mesh), s.cfg, params);
  CHECK(rep.constant == doctest::Approx(1.0).epsilon(0.02));
  CHECK(rep.shift > 0.0);
  CHECK(rep.iterations >= 2);
}

TEST_CASE("constant datum certifies the lower bound") {
  Setup s;
  const L2Pair c = L2Pair::constant(s.mesh, 1.0, 1.0);
  const Trajectory phi = solve_backward(s.op, s.none, nullptr, nullptr, c, s.cfg);
  const double quotient = inner(phi.states.front(), phi.states.front(), s.mesh) /
                          observation_energy(s.op, s.none, s.omega, s.cfg, c);
  // 3 pi / (T |omega|_h), with |omega|_h carrying the O(h) indicator error
  const double expected = 3 * std::numbers::pi / (s.cfg.horizon * s.omega.measure(s.mesh));
  CHECK(quotient == doctest::Approx(expected).epsilon(1e-10));
  CHECK(quotient >= 12 * 0.95);

  ObservabilityParams params;
  params.seed = 5;
  const ObservabilityReport rep =
      estimate_backward_observability(s.op, s.none, s.omega, s.cfg, params);
  CHECK(rep.constant >= quotient * (1 - 1e-9));
}

TEST_CASE("maximizer reproduces the reported constant") {
  Setup s;
  ObservabilityParams params;
  params.seed = 7;
  const ObservabilityReport rep =
      estimate_backward_observability(s.op, s.none, s.omega, s.cfg, params);
  const Trajectory phi = solve_backward(s.op, s.none, nullptr, nullptr, rep.maximizer, s.cfg);
  const double quotient = inner(phi.states.front(), phi.states.front(), s.mesh) /
                          observation_energy(s.op, s.none, s.omega, s.cfg, rep.maximizer);
  CHECK(quotient == doctest::Approx(rep.constant).epsilon(1e-6));
}

TEST_CASE("gramian is symmetric and positive semidefinite") {
  Setup s;
  ControlMaps maps(s.op, s.none, &s.omega, s.cfg);
  std::mt19937_64 rng(11);
  for (int probe = 0; probe < 5; ++probe) {
    const L2Pair u = random_pair(s.mesh, rng);
    const L2Pair w = random_pair(s.mesh, rng);
    const double uw = inner(maps.gramian(u), w, s.mesh);
    const double wu = inner(u, maps.gramian(w), s.mesh);
    CHECK(std::abs(uw - wu) <= 1e-10 * std::abs(uw));
    CHECK(inner(maps.gramian(u), u, s.mesh) >= -1e-12);
  }
}

TEST_CASE("monotone in the observation region and the horizon") {
  Setup s;
  ObservabilityParams params;
  params.seed = 13;
  const ControlRegion smaller = control_mask(s.mesh, DiskRegion{0, 0, 0.35});
  const double c_small =
      estimate_backward_observability(s.op, s.none, smaller, s.cfg, params).constant;
  const double c_big =
      estimate_backward_observability(s.op, s.none, s.omega, s.cfg, params).constant;
  CHECK(c_big <= c_small * 1.05);

  EvolutionConfig longer = s.cfg;
  longer.horizon = 2.0;
  longer.steps = 120;
  const double c_long =
      estimate_backward_observability(s.op, s.none, s.omega, longer, params).constant;
  CHECK(c_long <= c_big * 1.05);
}

TEST_CASE("forward final-state quotients") {
  Setup s;
  std::mt19937_64 rng(17);
  std::vector<L2Pair> samples;
  samples.push_back(L2Pair::constant(s.mesh, 1.0, 1.0));
  samples.push_back(random_pair(s.mesh, rng));

  // backward constant-datum quotient for reference
  const L2Pair c = L2Pair::constant(s.mesh, 1.0, 1.0);
  const Trajectory phi = solve_backward(s.op, s.none, nullptr, nullptr, c, s.cfg);
  const double backward_const = inner(phi.states.front(), phi.states.front(), s.mesh) /
                                observation_energy(s.op, s.none, s.omega, s.cfg, c);

  const ForwardFinalStateReport rep =
      check_forward_final_state(s.op, s.none, s.omega, s.cfg, samples, 3 * backward_const);
  REQUIRE(rep.quotients.size() == 2);
  // the constant solution is invariant under time reversal
  CHECK(rep.quotients[0] == doctest::Approx(backward_const).epsilon(1e-12));
  // high-frequency data smooths into the observed region: strictly below
  CHECK(rep.quotients[1] < rep.quotients[0]);
  CHECK(rep.within_backward_bound);
}

TEST_CASE("empty sample set is rejected") {
  Setup s;
  CHECK_THROWS_AS(check_forward_final_state(s.op, s.none, s.omega, s.cfg, {}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("empty region is rejected") {
  Setup s;
  ControlRegion empty;
  empty.indicator = Eigen::VectorXd::Zero(s.mesh.n_bulk());
  CHECK_THROWS_AS(estimate_backward_observability(s.op, s.none, empty, s.cfg, {}),
                  std::invalid_argument);
}

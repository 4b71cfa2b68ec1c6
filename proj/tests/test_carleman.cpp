#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynbc/carleman.hpp"

#include <cmath>
#include <random>

using namespace dynbc;

namespace {

struct Setup {
  Mesh mesh = build_disk_mesh(10, 32, 1.0);
  DiscreteOperator op = assemble(mesh, 1.0, 1.0);
  ControlRegion omega = control_mask(mesh, DiskRegion{0, 0, 0.5});
  ControlRegion omega_prime = control_mask(mesh, DiskRegion{0, 0, 0.25});
};

}  // namespace

TEST_CASE("eta0 on the unit disk") {
  Setup s;
  const Eigen::VectorXd eta0 = build_eta0(s.mesh, s.omega_prime);
  CHECK(eta0[0] == doctest::Approx(1.0));
  CHECK(s.mesh.trace(eta0).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < s.mesh.n_bulk(); ++i)
    if (!s.mesh.is_boundary_bulk_node(i)) CHECK(eta0[i] > 0.0);

  // radial derivative of 1 - r^2 at the boundary is -2
  const Eigen::VectorXd dnu = normal_derivative(s.mesh, eta0);
  for (int k = 0; k < s.mesh.n_boundary(); ++k)
    CHECK(dnu[k] == doctest::Approx(-2.0).epsilon(0.05));

  // gradient magnitude bounded below outside omega'
  const Eigen::VectorXd grad_sq = bulk_gradient_sq(s.mesh, eta0);
  for (int i = 0; i < s.mesh.n_bulk(); ++i)
    if (s.omega_prime.indicator[i] == 0.0) CHECK(grad_sq[i] > 0.04);
}

TEST_CASE("eta0 rejects unsupported configurations") {
  const Mesh iv = build_interval_mesh(20, 1.0);
  const ControlRegion seg = control_mask(iv, IntervalRegion{0.4, 0.6});
  CHECK_THROWS_AS(build_eta0(iv, seg), std::invalid_argument);

  Setup s;
  const ControlRegion off_center = control_mask(s.mesh, DiskRegion{0.5, 0.0, 0.1});
  CHECK_THROWS_AS(build_eta0(s.mesh, off_center), std::invalid_argument);
}

TEST_CASE("weight spot values at the documented parameter point") {
  Setup s;
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 1.0, 1.0, 2.0, 1.0);
  // boundary point (eta0 = 0), t = 1/2
  CHECK(cw.xi(0.5, 0.0) == doctest::Approx(4 * std::exp(2.0)).epsilon(1e-13));
  CHECK(cw.alpha(0.5, 0.0) ==
        doctest::Approx(4 * (std::exp(4.0) - std::exp(2.0))).epsilon(1e-13));
}

TEST_CASE("alpha and xi are singular at the time endpoints") {
  Setup s;
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 1.0, 1.0, 2.0, 1.0);
  CHECK_THROWS_AS(cw.alpha(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(cw.alpha(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(cw.xi(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(cw.xi(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(cw.alpha_tilde(1.0, 0.5), std::domain_error);
}

TEST_CASE("alpha~ at t = 0 equals the algebraic limit") {
  Setup s;
  const double T = 2.0;
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 1.0, 1.5, 2.0, T);
  const double eta = 0.7;
  const double expected =
      (std::exp(2 * cw.lambda * cw.m * cw.eta0_max) -
       std::exp(cw.lambda * (cw.m * cw.eta0_max + eta))) /
      (T * T);
  CHECK(cw.alpha_tilde(0.0, eta) == doctest::Approx(expected).epsilon(1e-13));
  // (t/T) alpha approaches it as t -> 0
  CHECK((1e-8 / T) * cw.alpha(1e-8, eta) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("rho is bounded, strictly positive and dominated by exp(s alpha~)") {
  Setup s;
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 1.0, 1.0, 1.05, 1.0);
  const double eps = 0.5;
  for (double t : {0.0, 0.25, 0.5, 0.9, 0.999, 1.0}) {
    for (double eta : {0.0, 0.3, 1.0}) {
      const double rho = cw.rho_eps(t, eta, eps);
      CHECK(rho >= 1.0);
      CHECK(std::isfinite(rho));
      if (t < 1.0) CHECK(rho <= std::exp(cw.s * cw.alpha_tilde(t, eta)) * (1 + 1e-12));
    }
  }
  // the exponent collapses to s*gap/(T(T-t+eps)): finite at t = T, not 1
  const double at_T = cw.rho_eps(1.0, 0.0, eps);
  CHECK(at_T == doctest::Approx(std::exp(cw.s * cw.gap(0.0) / eps)).epsilon(1e-12));
  CHECK_THROWS_AS(cw.rho_eps(0.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("weights are constant along the boundary ring") {
  Setup s;
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 2.0, 1.0, 1.05, 1.0);
  const L2Pair damping = cw.damping(0.37);
  const Eigen::VectorXd on_ring = s.mesh.trace(damping.bulk);
  CHECK((on_ring.array() - damping.surface[0]).abs().maxCoeff() == 0.0);
  CHECK(surface_gradient_sq(s.mesh, damping.surface).maxCoeff() == 0.0);
}

TEST_CASE("damping is monotone in s") {
  Setup s;
  const Eigen::VectorXd eta0 = build_eta0(s.mesh, s.omega_prime);
  const CarlemanWeights cw2 = make_weights(s.mesh, eta0, 2.0, 1.0, 1.05, 1.0);
  const CarlemanWeights cw4 = make_weights(s.mesh, eta0, 4.0, 1.0, 1.05, 1.0);
  for (double t : {0.2, 0.5, 0.8}) {
    const L2Pair w2 = cw2.damping(t), w4 = cw4.damping(t);
    CHECK(((w2.bulk - w4.bulk).array() >= 0.0).all());
  }
}

TEST_CASE("parameter validation") {
  Setup s;
  const Eigen::VectorXd eta0 = build_eta0(s.mesh, s.omega_prime);
  CHECK_THROWS_AS(make_weights(s.mesh, eta0, 0.5, 1.0, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_weights(s.mesh, eta0, 1.0, 0.5, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_weights(s.mesh, eta0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_weights(s.mesh, eta0, 1.0, 1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("ratio rejects degenerate inputs") {
  Setup s;
  EvolutionConfig cfg{2.0, 40, 0.5, 1e-10};
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 2.0, 2.0, 1.01, cfg.horizon);
  const Trajectory zero = Trajectory::zero(s.mesh, cfg.horizon, cfg.steps);
  CHECK_THROWS_AS(carleman_ratio(zero, s.op, PotentialPair::zero(), cw, s.omega, cfg),
                  std::invalid_argument);

  const Mesh iv = build_interval_mesh(20, 1.0);
  const DiscreteOperator iop = assemble(iv, 1.0, 0.0);
  const ControlRegion seg = control_mask(iv, IntervalRegion{0.4, 0.6});
  Trajectory tr = Trajectory::zero(iv, cfg.horizon, cfg.steps);
  for (auto& st : tr.states) st = L2Pair::constant(iv, 1.0, 1.0);
  CarlemanWeights fake = cw;  // weights from the disk, geometry mismatch
  CHECK_THROWS_AS(carleman_ratio(tr, iop, PotentialPair::zero(), fake, seg, cfg),
                  std::invalid_argument);
}

TEST_CASE("constant backward solution gives a finite ratio dominated by the region term") {
  Setup s;
  EvolutionConfig cfg{2.0, 60, 0.5, 1e-10};
  const CarlemanWeights cw =
      make_weights(s.mesh, build_eta0(s.mesh, s.omega_prime), 2.0, 2.0, 1.01, cfg.horizon);
  const Trajectory phi = solve_backward(s.op, PotentialPair::zero(), nullptr, nullptr,
                                        L2Pair::constant(s.mesh, 1.0, 1.0), cfg);
  const CarlemanRatioReport rep =
      carleman_ratio(phi, s.op, PotentialPair::zero(), cw, s.omega, cfg);
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio > 0.0);
  // residuals of the exact constant solution are solver-level noise, so the
  // control-region term carries the right-hand side
  CHECK(rep.rhs_terms[0] > 0.99 * rep.rhs());
}

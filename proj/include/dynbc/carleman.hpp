#pragma once

#include "dynbc/evolution.hpp"

#include <array>

namespace dynbc {

/// Carleman weight family built on the auxiliary function eta0:
///   alpha(x,t) = (t(T-t))^{-1} (e^{2 lambda m |eta0|_inf} - e^{lambda(m |eta0|_inf + eta0(x))}),
///   xi(x,t)    = (t(T-t))^{-1} e^{lambda(m |eta0|_inf + eta0(x))},
/// plus the one-sided variants alpha~ = (t/T) alpha, xi~ = (t/T) xi that are
/// singular only at t = T, and the bounded regularizer
///   rho_eps = exp(s alpha~ (T-t)/(T-t+eps)).
/// alpha and xi are singular at both endpoints; evaluating them there is an
/// error. Weights are constant on the boundary (eta0 = 0 there).
struct CarlemanWeights {
  double s = 2.0, lambda = 2.0, m = 2.0;
  double horizon = 1.0;
  Eigen::VectorXd eta0;  // per bulk node (zero on the boundary ring)
  double eta0_max = 1.0;
  int n_boundary = 0;

  double gap(double eta) const;       // e^{2 lambda m |eta0|} - e^{lambda(m |eta0| + eta)}
  double peak(double eta) const;      // e^{lambda(m |eta0| + eta)}

  double alpha(double t, double eta) const;
  double xi(double t, double eta) const;
  double alpha_tilde(double t, double eta) const;  // finite at t = 0, singular at t = T
  double xi_tilde(double t, double eta) const;
  double rho_eps(double t, double eta, double eps) const;
  double log_xi_tilde(double t, double eta) const;

  /// exp(-2 s alpha) over bulk and boundary nodes; zero at the endpoints.
  L2Pair damping(double t) const;
  L2Pair xi_pair(double t) const;
  L2Pair rho_pair(double t, double eps) const;

  /// Largest exponent of rho_eps over the time grid; used to reject
  /// parameter choices that overflow in double precision.
  double max_rho_exponent(const EvolutionConfig& cfg, double eps) const;
};

/// eta0(x) = R^2 - |x|^2 for the disk; valid whenever omega' contains the
/// origin (the only critical point). Other configurations and the interval
/// geometry are rejected: the delta > 0 surface diffusion is essential for
/// the boundary estimates, and a general position eta0 is out of scope.
Eigen::VectorXd build_eta0(const Mesh& mesh, const ControlRegion& omega_prime);

CarlemanWeights make_weights(const Mesh& mesh, Eigen::VectorXd eta0, double s, double lambda,
                             double m, double horizon);

struct CarlemanRatioReport {
  // lhs: [dt/laplace bulk block, dt/laplace boundary block, grad bulk,
  //       grad boundary, zero-order bulk, zero-order boundary, normal deriv]
  std::array<double, 7> lhs_terms{};
  // rhs: [control-region term, bulk residual, boundary residual]
  std::array<double, 3> rhs_terms{};
  double lhs() const;
  double rhs() const;
  double ratio = 0.0;
};

/// Evaluates both sides of the Carleman inequality on a backward trajectory.
/// Discrete time derivatives are centered; spatial operators come from the
/// assembled stiffness and the nodal difference formulas. Requires the disk
/// geometry with delta > 0.
CarlemanRatioReport carleman_ratio(const Trajectory& phi, const DiscreteOperator& op,
                                   const PotentialPair& pot, const CarlemanWeights& cw,
                                   const ControlRegion& omega, const EvolutionConfig& cfg);

}  // namespace dynbc

#pragma once

#include "dynbc/control.hpp"

#include <cstdint>

namespace dynbc {

struct ObservabilityParams {
  double tol = 1e-3;          // relative convergence of the quotient
  double residual_tol = 5e-2; // pencil residual accepted at convergence
  int max_outer = 80;         // power iteration cap
  double cg_tol = 3e-4;       // inner Gramian solves (inexact inverse iteration)
  int cg_max_iter = 2000;
  std::uint64_t seed = 1;
};

struct ObservabilityReport {
  double constant = 0.0;   // C_obs estimate
  int iterations = 0;
  double residual = 0.0;   // pencil residual of the accepted eigenpair
  double shift = 0.0;      // epsilon_Lambda used in the inner solves
  L2Pair maximizer;        // maximizing final datum phi_T
  double maximizer_quotient = 0.0;
};

/// Estimates sup over phi_T of |phi(0)|^2 / int_omega |phi|^2 for the
/// homogeneous backward system by power iteration on the pencil
/// R*R phi = C Lambda phi, with R phi_T = phi(0) and Lambda the control
/// Gramian. Inner Lambda-solves run CG on Lambda + shift I; the shift is
/// derived from a stochastic trace estimate and reported.
ObservabilityReport estimate_backward_observability(const DiscreteOperator& op,
                                                    const PotentialPair& pot,
                                                    const ControlRegion& region,
                                                    const EvolutionConfig& cfg,
                                                    const ObservabilityParams& params);

struct ForwardFinalStateReport {
  std::vector<double> quotients;  // |y(T)|^2 / int_omega |y|^2 per sample
  double max_quotient = 0.0;
  double backward_constant = 0.0;
  bool within_backward_bound = false;
};

/// Evaluates the final-state quotient of the uncontrolled forward flow on
/// the given initial data and compares against the backward estimate (the
/// two inequalities are related by time reversal).
ForwardFinalStateReport check_forward_final_state(const DiscreteOperator& op,
                                                  const PotentialPair& pot,
                                                  const ControlRegion& region,
                                                  const EvolutionConfig& cfg,
                                                  const std::vector<L2Pair>& samples,
                                                  double backward_constant, double tolerance = 0.05);

/// The discrete observation energy int_0^T int_omega |phi|^2 of the backward
/// solution with final datum phi_T (the Gramian quadratic form).
double observation_energy(const DiscreteOperator& op, const PotentialPair& pot,
                          const ControlRegion& region, const EvolutionConfig& cfg,
                          const L2Pair& phi_T);

}  // namespace dynbc

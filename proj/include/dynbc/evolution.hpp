#pragma once

#include "dynbc/operators.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace dynbc {

struct EvolutionConfig {
  double horizon = 1.0;      // T
  int steps = 200;           // M
  double theta = 0.5;        // in [1/2, 1]
  double solver_tol = 1e-10;
  int direct_solver_limit = 200'000;  // switch to iterative solves above this size

  void validate() const;
  double dt() const { return horizon / steps; }
  double node_time(int m) const { return horizon * m / steps; }
  double stage_time(int n) const { return horizon * (n + theta) / steps; }
};

struct SourceData {
  std::function<Eigen::VectorXd(double)> f;  // bulk source
  std::function<Eigen::VectorXd(double)> g;  // surface source
  std::function<Eigen::VectorXd(double)> v;  // control, bulk, supported in omega
  const ControlRegion* region = nullptr;     // when set, v is checked against it
  L2Pair y0;
};

/// One-step theta scheme on the coupled space,
///   E_{n+1} u^{n+1} = I_n u^n + dt s^n,
///   E_m = D + theta dt (K + P_m),  I_m = D - (1-theta) dt (K + P_m),
/// with D the coupled mass, P_m the potential diagonal at t_m and s^n the
/// quadrature-weighted source at t_{n+theta}. The adjoint sweep transposes
/// these exact matrices, so every duality identity used by the control
/// machinery holds at solver precision. Factorizations are cached: one for
/// time-independent potentials, per-step (when affordable) otherwise.
class ThetaStepper {
 public:
  ThetaStepper(const DiscreteOperator& op, const PotentialPair& pot, const EvolutionConfig& cfg);

  const DiscreteOperator& op() const { return *op_; }
  const EvolutionConfig& config() const { return cfg_; }

  /// All coupled states u^0..u^M. `load` (nullable) maps t_{n+theta} to the
  /// coupled source vector.
  std::vector<Eigen::VectorXd> forward(const Eigen::VectorXd& u0,
                                       const std::function<Eigen::VectorXd(double)>& load) const;

  struct AdjointSweep {
    std::vector<Eigen::VectorXd> stages;  // psi^n = E_{n+1}^{-1} w^{n+1}, n = 0..M-1
    std::vector<Eigen::VectorXd> nodal;   // D^{-1} w^m, m = 0..M (kept when requested)
    Eigen::VectorXd q0;                   // D^{-1} w^0
  };

  /// Transpose sweep: w^M = D terminal; w^m = I_m psi^m + D nodal_dual(m).
  /// `terminal` and the optional `nodal_dual(m)` (m = M-1..0) are coupled
  /// vectors in L2 coordinates; time-quadrature factors are the caller's.
  AdjointSweep adjoint(const Eigen::VectorXd& terminal,
                       const std::function<Eigen::VectorXd(int)>& nodal_dual,
                       bool keep_nodal) const;

  /// Coupled source load for (f, g, v) at time t.
  Eigen::VectorXd source_load(const SourceData& src, double t) const;

 private:
  struct Factor;
  Eigen::SparseMatrix<double> implicit_matrix(int node) const;
  const Factor& factor(int node) const;
  Eigen::VectorXd solve_with(const Factor& fac, const Eigen::SparseMatrix<double>& mat,
                             const Eigen::VectorXd& rhs, bool check) const;
  Eigen::VectorXd apply_explicit(int node, const Eigen::VectorXd& x) const;

  const DiscreteOperator* op_;
  const PotentialPair* pot_;
  EvolutionConfig cfg_;
  double dt_;
  Eigen::SparseMatrix<double> base_implicit_;  // D + theta dt K
  std::vector<std::shared_ptr<Factor>> factors_;
  std::vector<Eigen::VectorXd> potential_diags_;  // P_m, m = 0..M (empty if zero)
  bool static_potential_ = true;
  bool direct_ = true;
};

/// Strong/mild solver for the forward system. States: y^0 is the given
/// initial pair, y^m (m >= 1) the coupled scheme states.
Trajectory solve_forward(const DiscreteOperator& op, const PotentialPair& pot,
                         const SourceData& src, const EvolutionConfig& cfg);

/// Backward solver with phi(T) = phi_T. Homogeneous data: exact transpose of
/// the forward stepping. Inhomogeneous data: the time-reversed forward solve
/// with reflected coefficients (the two coincide for time-independent
/// potentials).
Trajectory solve_backward(const DiscreteOperator& op, const PotentialPair& pot,
                          const std::function<Eigen::VectorXd(double)>& f,
                          const std::function<Eigen::VectorXd(double)>& g, const L2Pair& phi_T,
                          const EvolutionConfig& cfg);

/// Maximum, over a fixed family of smooth space-time test functions vanishing
/// at t = T, of the discrete weak-form defect of `tr` against the scheme,
/// normalized by the test-function norm.
double residual_distributional(const Trajectory& tr, const DiscreteOperator& op,
                               const PotentialPair& pot, const SourceData& src,
                               const EvolutionConfig& cfg);

}  // namespace dynbc

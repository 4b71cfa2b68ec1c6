#pragma once

#include "dynbc/carleman.hpp"

namespace dynbc {

/// Control samples on the staggered grid: column n holds the bulk control
/// acting on the step [t_n, t_{n+1}) (the scheme reads it at t_{n+theta}).
struct StepControl {
  double horizon = 0.0;
  double theta = 0.5;
  Eigen::MatrixXd values;  // n_bulk x M

  int steps() const { return static_cast<int>(values.cols()); }

  /// Piecewise evaluator for SourceData::v; exact at the stage times.
  std::function<Eigen::VectorXd(double)> evaluator() const;

  void write_csv(const std::string& path) const;
};

/// The duality maps of the discrete control problem, all built on the same
/// stepper so that <L_T v, phi_T> = sum_n dt <1_omega v^n, psi^n> holds at
/// solver precision:
///   observe      L_T^* : phi_T -> masked adjoint stages,
///   propagate    L     : v -> state trajectory (zero data),
///   final_state  L_T   : v -> y(T),
///   gramian      L_T L_T^*.
class ControlMaps {
 public:
  /// `region == nullptr` means full-domain observation in the pair norm
  /// (bulk and surface); used by the observability estimator. Controls
  /// proper always come with a region.
  ControlMaps(const DiscreteOperator& op, const PotentialPair& pot, const ControlRegion* region,
              const EvolutionConfig& cfg);

  const DiscreteOperator& op() const { return *op_; }
  const ControlRegion* region() const { return region_; }
  const EvolutionConfig& config() const { return cfg_; }
  const ThetaStepper& stepper() const { return stepper_; }

  struct Observation {
    Eigen::MatrixXd stages;  // masked adjoint stages, n_bulk x M
    L2Pair initial;          // phi(0)
  };

  Eigen::MatrixXd observe(const L2Pair& phi_T) const;
  Observation observe_full(const L2Pair& phi_T) const;
  std::vector<Eigen::VectorXd> propagate(const Eigen::MatrixXd& v) const;  // coupled states
  L2Pair final_state(const Eigen::MatrixXd& v) const;
  L2Pair gramian(const L2Pair& phi_T) const;

  /// Forward solve with full source data, reusing this stepper's
  /// factorizations (equivalent to solve_forward).
  Trajectory simulate(const SourceData& src) const;

  /// Fused adjoint of (L, L_T): masked stages of the sweep carrying nodal
  /// dual data (already time-weighted) and a terminal dual vector.
  Eigen::MatrixXd adjoint(const std::function<L2Pair(int)>& nodal_dual,
                          const L2Pair* terminal_dual) const;

  /// Control space inner product: sum_n dt (v^n, w^n) over the observation
  /// weights (bulk quadrature, plus surface on the ring for full-domain).
  double control_dot(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w) const;

  Eigen::MatrixXd mask(Eigen::MatrixXd v) const;

 private:
  const DiscreteOperator* op_;
  const ControlRegion* region_;
  EvolutionConfig cfg_;
  ThetaStepper stepper_;
};

struct CgDiagnostics {
  int iterations = 0;
  double residual = 0.0;  // relative
  bool converged = false;
  std::vector<double> history;
};

struct ControlResult {
  StepControl v;
  Trajectory y;               // controlled state, re-simulated with v
  double terminal_norm = 0.0; // |y(T)|_{L2}
  double control_energy = 0.0;        // 1/2 int_omega v^2
  double weighted_state_energy = 0.0; // 1/2 int |rho y|^2 (weighted mode)
  double terminal_penalty = 0.0;      // 1/(2 mu) |y(T)|^2 (weighted mode)
  CgDiagnostics diag;
  L2Pair minimizer_phi_T;     // penalized HUM only
};

struct HumParams {
  double epsilon = 1e-4;
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
};

struct WeightedParams {
  double eps_rho = 1e-2;
  double mu = 1e-6;
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
};

/// Penalized HUM: solves (Lambda + eps I) phi_T = -y_free(T) by conjugate
/// gradients and returns v = 1_omega phi along with the re-simulated state.
/// The normal equations force y(T) = -eps phi_T up to the CG residual.
ControlResult penalized_hum(const DiscreteOperator& op, const PotentialPair& pot,
                            const std::function<Eigen::VectorXd(double)>& f,
                            const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                            const ControlRegion& region, const EvolutionConfig& cfg,
                            const HumParams& params);

/// Minimal control in the weighted norm: minimizes over v
///   1/2 |rho_eps (y_free + L v)|^2  + 1/2 |v|^2  + 1/(2 mu) |y(T)|^2,
/// the bounded-weight surrogate of the J functional, by CG on the control
/// space. Data (f, g) must lie in the weighted classes (decay at t = T),
/// which is checked numerically in log space.
ControlResult weighted_minimal_control(const DiscreteOperator& op, const PotentialPair& pot,
                                       const std::function<Eigen::VectorXd(double)>& f,
                                       const std::function<Eigen::VectorXd(double)>& g,
                                       const L2Pair& y0, const ControlRegion& region,
                                       const CarlemanWeights& cw, const EvolutionConfig& cfg,
                                       const WeightedParams& params);

/// The weighted objective evaluated at an arbitrary control (minimality
/// certificates, cross-checks).
double weighted_objective(const DiscreteOperator& op, const PotentialPair& pot,
                          const std::function<Eigen::VectorXd(double)>& f,
                          const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                          const ControlRegion& region, const CarlemanWeights& cw,
                          const EvolutionConfig& cfg, const WeightedParams& params,
                          const StepControl& v);

/// Weighted data norm |e^{s alpha~} xi~^{-3/2} h|_{L2}; throws when the data
/// is not in the weighted class (non-decaying at t = T).
double weighted_data_norm(const std::function<Eigen::VectorXd(double)>& h, bool bulk_component,
                          const DiscreteOperator& op, const CarlemanWeights& cw,
                          const EvolutionConfig& cfg);

}  // namespace dynbc

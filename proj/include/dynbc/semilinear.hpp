#pragma once

#include "dynbc/control.hpp"
#include "dynbc/observability.hpp"

namespace dynbc {

/// Globally Lipschitz nonlinearity with F(0) = G(0) = 0 and its bounded
/// quotient form F(xi) = F~(xi) xi, G(xi) = G~(xi) xi.
struct Nonlinearity {
  std::function<double(double)> F;       // bulk
  std::function<double(double)> G;       // boundary
  std::function<double(double)> F_tilde;
  std::function<double(double)> G_tilde;
  double bound = 1.0;  // sup |F~|, |G~|

  static Nonlinearity none();

  /// Checks F(0) = G(0) = 0, the quotient identity on sampled arguments and
  /// the declared bound. Throws on violation.
  void validate() const;
};

enum class LinearSolverKind { weighted, hum };

struct PicardParams {
  int max_iter = 50;
  double fp_tol = 1e-4;     // relative fixed-point tolerance
  double damping = 1.0;     // halved when the distances oscillate
  LinearSolverKind inner = LinearSolverKind::weighted;
};

struct PicardHistoryEntry {
  int iteration = 0;
  double distance = 0.0;       // relative trajectory change
  double terminal_norm = 0.0;  // of the linear sub-solve state
  int cg_iterations = 0;
};

class PicardNonConvergence : public std::runtime_error {
 public:
  PicardNonConvergence(const std::string& msg, std::vector<PicardHistoryEntry> history)
      : std::runtime_error(msg), history(std::move(history)) {}
  std::vector<PicardHistoryEntry> history;
};

struct SemilinearResult {
  ControlResult control;    // accepted linear sub-solve
  Trajectory state;         // re-simulated through the nonlinear dynamics
  double terminal_norm = 0.0;
  std::vector<PicardHistoryEntry> history;
  int iterations = 0;
  bool converged = false;
};

/// Null control of the semilinear system by fixed-point iteration on the
/// linearized control map: each sweep freezes the potentials a = F~(y),
/// b = G~(y) and solves the linear weighted-minimal-control (or HUM)
/// problem. Existence comes from a compactness argument; the iteration is
/// the constructive surrogate and reports non-convergence honestly.
SemilinearResult picard_control(const DiscreteOperator& op, const Nonlinearity& nl,
                                const std::function<Eigen::VectorXd(double)>& f,
                                const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                                const ControlRegion& region, const EvolutionConfig& cfg,
                                const CarlemanWeights& cw, const WeightedParams& wparams,
                                const HumParams& hparams, const PicardParams& pparams);

/// First-order semi-implicit integration of the nonlinear dynamics: linear
/// part implicit, nonlinearity explicit. Used for the uncontrolled starting
/// iterate and the final certificate re-simulation.
Trajectory solve_semilinear(const DiscreteOperator& op, const Nonlinearity& nl,
                            const std::function<Eigen::VectorXd(double)>& f,
                            const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                            const StepControl* v, const EvolutionConfig& cfg);

void write_history_csv(const std::vector<PicardHistoryEntry>& history, const std::string& path);

}  // namespace dynbc

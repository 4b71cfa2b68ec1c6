#include "dynbc/semilinear.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dynbc {

Nonlinearity Nonlinearity::none() {
  Nonlinearity nl;
  nl.F = [](double) { return 0.0; };
  nl.G = [](double) { return 0.0; };
  nl.F_tilde = [](double) { return 0.0; };
  nl.G_tilde = [](double) { return 0.0; };
  nl.bound = 0.0;
  return nl;
}

void Nonlinearity::validate() const {
  if (!F || !G || !F_tilde || !G_tilde)
    throw std::invalid_argument("Nonlinearity: all four evaluators must be set");
  if (std::abs(F(0.0)) > 1e-14 || std::abs(G(0.0)) > 1e-14)
    throw std::invalid_argument("Nonlinearity: F(0) = G(0) = 0 is required");
  const double samples[] = {-10.0, -1.0, -0.1, -1e-3, 1e-3, 0.1, 1.0, 10.0};
  for (double xi : samples) {
    const double ft = F_tilde(xi), gt = G_tilde(xi);
    if (std::abs(ft) > bound + 1e-12 || std::abs(gt) > bound + 1e-12)
      throw std::invalid_argument("Nonlinearity: quotient exceeds the declared bound");
    if (std::abs(ft * xi - F(xi)) > 1e-10 * std::max(1.0, std::abs(F(xi))) ||
        std::abs(gt * xi - G(xi)) > 1e-10 * std::max(1.0, std::abs(G(xi))))
      throw std::invalid_argument("Nonlinearity: F~(xi) xi does not reproduce F(xi)");
  }
}

Trajectory solve_semilinear(const DiscreteOperator& op, const Nonlinearity& nl,
                            const std::function<Eigen::VectorXd(double)>& f,
                            const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                            const StepControl* v, const EvolutionConfig& cfg) {
  cfg.validate();
  const Mesh& mesh = op.mesh;
  const int M = cfg.steps;
  const double dt = cfg.dt();

  Eigen::SparseMatrix<double> system =
      Eigen::SparseMatrix<double>(op.mass.asDiagonal()) + dt * op.stiffness;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve_semilinear: factorization failed");

  auto nonlinear_load = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd s(op.size());
    for (int i = 0; i < op.size(); ++i) s[i] = mesh.bulk_weights[i] * nl.F(u[i]);
    for (int k = 0; k < mesh.n_boundary(); ++k) {
      const int i = mesh.boundary_to_bulk[k];
      s[i] += mesh.boundary_weights[k] * nl.G(u[i]);
    }
    return s;
  };

  Trajectory tr;
  tr.horizon = cfg.horizon;
  tr.states.reserve(static_cast<size_t>(M) + 1);
  tr.states.push_back(y0);

  Eigen::VectorXd u = op.to_coupled(y0);
  for (int n = 0; n < M; ++n) {
    Eigen::VectorXd rhs = op.mass.cwiseProduct(u) - dt * nonlinear_load(u);
    const double t_next = cfg.node_time(n + 1);
    if (f) rhs += dt * mesh.bulk_weights.cwiseProduct(f(t_next));
    if (g) {
      const Eigen::VectorXd gv = g(t_next);
      for (int k = 0; k < mesh.n_boundary(); ++k)
        rhs[mesh.boundary_to_bulk[k]] += dt * mesh.boundary_weights[k] * gv[k];
    }
    if (v) rhs += dt * mesh.bulk_weights.cwiseProduct(v->values.col(n));
    u = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("solve_semilinear: linear solve failed at step " + std::to_string(n));
    tr.states.push_back(op.from_coupled(u));
  }
  return tr;
}

namespace {

constexpr double trajectory_norm_floor = 1e-12;

double trajectory_distance(const Trajectory& a, const Trajectory& b, const Mesh& mesh) {
  double acc = 0.0;
  const double dt = a.dt();
  for (int m = 0; m <= a.steps(); ++m) {
    const double tau = (m == 0 || m == a.steps()) ? dt / 2 : dt;
    L2Pair diff = a.at(m) - b.at(m);
    acc += tau * inner(diff, diff, mesh);
  }
  return std::sqrt(acc);
}

PotentialPair frozen_potentials(const DiscreteOperator& op, const Nonlinearity& nl,
                                const Trajectory& y) {
  const Mesh& mesh = op.mesh;
  const int M = y.steps();
  Eigen::MatrixXd a(mesh.n_bulk(), M + 1), b(mesh.n_boundary(), M + 1);
  for (int m = 0; m <= M; ++m) {
    for (int i = 0; i < mesh.n_bulk(); ++i) a(i, m) = nl.F_tilde(y.at(m).bulk[i]);
    for (int k = 0; k < mesh.n_boundary(); ++k) b(k, m) = nl.G_tilde(y.at(m).surface[k]);
  }
  const double worst = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (!std::isfinite(worst) || worst > nl.bound + 1e-12)
    throw std::runtime_error(
        "picard_control: linearized potential exceeds the nonlinearity bound at an iterate");
  return PotentialPair::tabulated(mesh, y.horizon, std::move(a), std::move(b),
                                  nl.bound + 1e-12);
}

}  // namespace

SemilinearResult picard_control(const DiscreteOperator& op, const Nonlinearity& nl,
                                const std::function<Eigen::VectorXd(double)>& f,
                                const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                                const ControlRegion& region, const EvolutionConfig& cfg,
                                const CarlemanWeights& cw, const WeightedParams& wparams,
                                const HumParams& hparams, const PicardParams& pparams) {
  nl.validate();
  if (pparams.max_iter < 1) throw std::invalid_argument("picard_control: max_iter >= 1");
  if (!(pparams.fp_tol > 0.0)) throw std::invalid_argument("picard_control: fp_tol > 0");

  // semilinear initial data must be trace-compatible (H^1 regularity)
  {
    const Eigen::VectorXd tr = op.mesh.trace(y0.bulk);
    const double mismatch = (tr - y0.surface).norm();
    if (mismatch > 1e-9 * (1.0 + y0.bulk.norm()))
      throw std::invalid_argument(
          "picard_control: initial datum must be trace-compatible (y0 in H^1)");
  }

  SemilinearResult res;
  Trajectory y_current = solve_semilinear(op, nl, f, g, y0, nullptr, cfg);
  double damping = pparams.damping;
  double last_distance = -1.0;

  for (int k = 0; k < pparams.max_iter; ++k) {
    const PotentialPair frozen = frozen_potentials(op, nl, y_current);

    ControlResult lin;
    if (pparams.inner == LinearSolverKind::weighted)
      lin = weighted_minimal_control(op, frozen, f, g, y0, region, cw, cfg, wparams);
    else
      lin = penalized_hum(op, frozen, f, g, y0, region, cfg, hparams);

    Trajectory y_next = lin.y;
    if (damping != 1.0) {
      for (int m = 0; m <= y_next.steps(); ++m)
        y_next.at(m) = (1.0 - damping) * y_current.at(m) + damping * lin.y.at(m);
    }

    const double base = std::max(trajectory_norm_floor, time_l2_norm(y_current, op.mesh));
    const double dist = trajectory_distance(y_next, y_current, op.mesh) / base;
    res.history.push_back({k + 1, dist, lin.terminal_norm, lin.diag.iterations});
    res.iterations = k + 1;
    res.control = std::move(lin);
    y_current = std::move(y_next);

    if (dist <= pparams.fp_tol) {
      res.converged = true;
      break;
    }
    if (last_distance >= 0.0 && dist > last_distance) damping = std::max(damping / 2, 1.0 / 16);
    last_distance = dist;
  }

  if (!res.converged)
    throw PicardNonConvergence(
        "picard_control: fixed-point iteration did not reach tolerance within " +
            std::to_string(pparams.max_iter) + " iterations (last distance " +
            std::to_string(res.history.back().distance) + ")",
        res.history);

  res.state = solve_semilinear(op, nl, f, g, y0, &res.control.v, cfg);
  res.terminal_norm = norm(res.state.states.back(), op.mesh);
  return res;
}

void write_history_csv(const std::vector<PicardHistoryEntry>& history, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "iteration,distance,terminal_norm,cg_iterations\n");
  for (const auto& h : history)
    std::fprintf(f, "%d,%.17g,%.17g,%d\n", h.iteration, h.distance, h.terminal_norm,
                 h.cg_iterations);
  std::fclose(f);
}

}  // namespace dynbc

#include "dynbc/evolution.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dynbc {

void EvolutionConfig::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("EvolutionConfig: horizon must be positive");
  if (steps < 2) throw std::invalid_argument("EvolutionConfig: need at least 2 time steps");
  if (theta < 0.5 || theta > 1.0)
    throw std::invalid_argument("EvolutionConfig: theta must lie in [1/2, 1]");
  if (!(solver_tol > 0.0)) throw std::invalid_argument("EvolutionConfig: solver_tol must be positive");
}

struct ThetaStepper::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  Eigen::SparseMatrix<double> matrix;
  bool direct = true;

  void compute(Eigen::SparseMatrix<double> mat, bool use_direct, double tol) {
    matrix = std::move(mat);
    direct = use_direct;
    if (direct) {
      ldlt.compute(matrix);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("ThetaStepper: factorization of the implicit matrix failed");
    } else {
      cg.setTolerance(tol);
      cg.setMaxIterations(10 * matrix.rows());
      cg.compute(matrix);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (direct) {
      Eigen::VectorXd x = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("ThetaStepper: linear solve failed");
      return x;
    }
    Eigen::VectorXd x = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw std::runtime_error("ThetaStepper: iterative solve stagnated at residual " +
                               std::to_string(cg.error()));
    return x;
  }
};

ThetaStepper::ThetaStepper(const DiscreteOperator& op, const PotentialPair& pot,
                           const EvolutionConfig& cfg)
    : op_(&op), pot_(&pot), cfg_(cfg), dt_(cfg.dt()) {
  cfg.validate();
  const int n = op.size();
  base_implicit_ = Eigen::SparseMatrix<double>(op.mass.asDiagonal()) +
                   (cfg_.theta * dt_) * op.stiffness;
  base_implicit_.makeCompressed();

  static_potential_ = !pot.time_dependent;
  if (!pot.is_zero()) {
    if (static_potential_) {
      potential_diags_.push_back(op.potential_diag(pot, 0.0));
    } else {
      potential_diags_.reserve(cfg_.steps + 1);
      for (int m = 0; m <= cfg_.steps; ++m)
        potential_diags_.push_back(op.potential_diag(pot, cfg_.node_time(m)));
    }
  }

  // Factorization cache. Static potentials need a single factor; otherwise
  // cache per step while the memory footprint stays desk-scale.
  direct_ = n <= cfg_.direct_solver_limit;
  const bool cache_all = !static_potential_ &&
                         static_cast<long>(n) * (cfg_.steps + 1) <= 600'000;
  if (static_potential_) {
    factors_.resize(1);
    auto fac = std::make_shared<Factor>();
    fac->compute(implicit_matrix(1), direct_, cfg_.solver_tol);
    factors_[0] = std::move(fac);
  } else if (cache_all) {
    factors_.resize(cfg_.steps + 1);
    for (int m = 1; m <= cfg_.steps; ++m) {
      auto fac = std::make_shared<Factor>();
      fac->compute(implicit_matrix(m), direct_, cfg_.solver_tol);
      factors_[m] = std::move(fac);
    }
  }
}

Eigen::SparseMatrix<double> ThetaStepper::implicit_matrix(int node) const {
  if (potential_diags_.empty()) return base_implicit_;
  const Eigen::VectorXd& p = static_potential_ ? potential_diags_[0] : potential_diags_[node];
  Eigen::SparseMatrix<double> mat = base_implicit_;
  mat += Eigen::SparseMatrix<double>((cfg_.theta * dt_ * p).asDiagonal());
  return mat;
}

const ThetaStepper::Factor& ThetaStepper::factor(int node) const {
  if (static_potential_) return *factors_[0];
  if (!factors_.empty() && factors_[node]) return *factors_[node];
  // fall through: factor on demand without caching
  thread_local Factor scratch;
  scratch.compute(implicit_matrix(node), direct_, cfg_.solver_tol);
  return scratch;
}

Eigen::VectorXd ThetaStepper::solve_with(const Factor& fac, const Eigen::SparseMatrix<double>& mat,
                                         const Eigen::VectorXd& rhs, bool check) const {
  Eigen::VectorXd x = fac.solve(rhs);
  if (check) {
    const double res = (mat * x - rhs).norm();
    const double scale = rhs.norm() + 1e-300;
    if (res > 1e4 * cfg_.solver_tol * scale) {
      std::ostringstream msg;
      msg << "ThetaStepper: linear solve residual " << res / scale << " exceeds tolerance "
          << cfg_.solver_tol;
      throw std::runtime_error(msg.str());
    }
  }
  return x;
}

Eigen::VectorXd ThetaStepper::apply_explicit(int node, const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = op_->mass.cwiseProduct(x) - ((1.0 - cfg_.theta) * dt_) * (op_->stiffness * x);
  if (!potential_diags_.empty()) {
    const Eigen::VectorXd& p = static_potential_ ? potential_diags_[0] : potential_diags_[node];
    y -= ((1.0 - cfg_.theta) * dt_) * p.cwiseProduct(x);
  }
  return y;
}

std::vector<Eigen::VectorXd> ThetaStepper::forward(
    const Eigen::VectorXd& u0, const std::function<Eigen::VectorXd(double)>& load) const {
  const int M = cfg_.steps;
  std::vector<Eigen::VectorXd> u(static_cast<size_t>(M) + 1);
  u[0] = u0;
  for (int n = 0; n < M; ++n) {
    Eigen::VectorXd rhs = apply_explicit(n, u[n]);
    if (load) rhs += dt_ * load(cfg_.stage_time(n));
    const Factor& fac = factor(n + 1);
    u[n + 1] = solve_with(fac, fac.matrix, rhs, n == 0);
  }
  return u;
}

ThetaStepper::AdjointSweep ThetaStepper::adjoint(
    const Eigen::VectorXd& terminal, const std::function<Eigen::VectorXd(int)>& nodal_dual,
    bool keep_nodal) const {
  const int M = cfg_.steps;
  AdjointSweep sweep;
  sweep.stages.resize(M);
  if (keep_nodal) sweep.nodal.resize(static_cast<size_t>(M) + 1);

  Eigen::VectorXd w = op_->mass.cwiseProduct(terminal);
  if (keep_nodal) sweep.nodal[M] = terminal;
  for (int n = M - 1; n >= 0; --n) {
    const Factor& fac = factor(n + 1);
    sweep.stages[n] = solve_with(fac, fac.matrix, w, n == M - 1);
    w = apply_explicit(n, sweep.stages[n]);
    if (nodal_dual) {
      Eigen::VectorXd r = nodal_dual(n);
      if (r.size() > 0) w += op_->mass.cwiseProduct(r);
    }
    if (keep_nodal) sweep.nodal[n] = w.cwiseQuotient(op_->mass);
  }
  sweep.q0 = w.cwiseQuotient(op_->mass);
  return sweep;
}

Eigen::VectorXd ThetaStepper::source_load(const SourceData& src, double t) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(op_->size());
  const Mesh& mesh = op_->mesh;
  if (src.f) s += mesh.bulk_weights.cwiseProduct(src.f(t));
  if (src.g) {
    const Eigen::VectorXd gv = src.g(t);
    if (gv.size() != mesh.n_boundary()) throw std::invalid_argument("source g: wrong size");
    for (int k = 0; k < mesh.n_boundary(); ++k)
      s[mesh.boundary_to_bulk[k]] += mesh.boundary_weights[k] * gv[k];
  }
  if (src.v) {
    Eigen::VectorXd vv = src.v(t);
    if (vv.size() != mesh.n_bulk()) throw std::invalid_argument("source v: wrong size");
    if (src.region) {
      for (int i = 0; i < mesh.n_bulk(); ++i)
        if (src.region->indicator[i] == 0.0 && vv[i] != 0.0)
          throw std::invalid_argument("control v is supported outside the control region");
    }
    s += mesh.bulk_weights.cwiseProduct(vv);
  }
  return s;
}

Trajectory solve_forward(const DiscreteOperator& op, const PotentialPair& pot,
                         const SourceData& src, const EvolutionConfig& cfg) {
  ThetaStepper stepper(op, pot, cfg);
  std::function<Eigen::VectorXd(double)> load;
  if (src.f || src.g || src.v)
    load = [&stepper, &src](double t) { return stepper.source_load(src, t); };

  const auto u = stepper.forward(op.to_coupled(src.y0), load);

  Trajectory tr;
  tr.horizon = cfg.horizon;
  tr.states.reserve(u.size());
  tr.states.push_back(src.y0);
  for (size_t m = 1; m < u.size(); ++m) tr.states.push_back(op.from_coupled(u[m]));
  return tr;
}

Trajectory solve_backward(const DiscreteOperator& op, const PotentialPair& pot,
                          const std::function<Eigen::VectorXd(double)>& f,
                          const std::function<Eigen::VectorXd(double)>& g, const L2Pair& phi_T,
                          const EvolutionConfig& cfg) {
  cfg.validate();
  const int M = cfg.steps;

  if (!f && !g) {
    ThetaStepper stepper(op, pot, cfg);
    const auto sweep = stepper.adjoint(op.to_coupled(phi_T), nullptr, /*keep_nodal=*/true);
    Trajectory tr;
    tr.horizon = cfg.horizon;
    tr.states.resize(static_cast<size_t>(M) + 1);
    tr.states[M] = phi_T;
    for (int m = 0; m < M; ++m) tr.states[m] = op.from_coupled(sweep.nodal[m]);
    return tr;
  }

  // Inhomogeneous case: reflect the data and run forward (t' = T - t).
  const double T = cfg.horizon;
  PotentialPair reflected;
  reflected.time_dependent = pot.time_dependent;
  reflected.bound = pot.bound;
  if (pot.a) reflected.a = [&pot, T](double t) { return pot.a(T - t); };
  if (pot.b) reflected.b = [&pot, T](double t) { return pot.b(T - t); };

  SourceData src;
  src.y0 = phi_T;
  if (f) src.f = [&f, T](double t) { return f(T - t); };
  if (g) src.g = [&g, T](double t) { return g(T - t); };

  Trajectory fwd = solve_forward(op, reflected, src, cfg);
  Trajectory tr;
  tr.horizon = T;
  tr.states.resize(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) tr.states[m] = fwd.states[static_cast<size_t>(M - m)];
  return tr;
}

double residual_distributional(const Trajectory& tr, const DiscreteOperator& op,
                               const PotentialPair& pot, const SourceData& src,
                               const EvolutionConfig& cfg) {
  if (tr.steps() != cfg.steps || std::abs(tr.horizon - cfg.horizon) > 1e-12 * cfg.horizon)
    throw std::invalid_argument("residual_distributional: trajectory grid does not match config");
  ThetaStepper stepper(op, pot, cfg);
  const int M = cfg.steps;
  const double dt = cfg.dt();
  const Mesh& mesh = op.mesh;

  std::vector<Eigen::VectorXd> u(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) u[m] = op.to_coupled(tr.at(m));

  // step defects E_{n+1} u^{n+1} - I_n u^n - dt s^n
  std::vector<Eigen::VectorXd> defect(M);
  for (int n = 0; n < M; ++n) {
    Eigen::VectorXd impl =
        op.mass.cwiseProduct(u[n + 1]) + (cfg.theta * dt) * (op.stiffness * u[n + 1]);
    Eigen::VectorXd expl =
        op.mass.cwiseProduct(u[n]) - ((1 - cfg.theta) * dt) * (op.stiffness * u[n]);
    if (!pot.is_zero()) {
      impl += (cfg.theta * dt) * op.potential_diag(pot, cfg.node_time(n + 1)).cwiseProduct(u[n + 1]);
      expl -= ((1 - cfg.theta) * dt) * op.potential_diag(pot, cfg.node_time(n)).cwiseProduct(u[n]);
    }
    defect[n] = impl - expl;
    if (src.f || src.g || src.v) defect[n] -= dt * stepper.source_load(src, cfg.stage_time(n));
  }

  // smooth test functions vanishing at t = T
  std::vector<std::function<double(double)>> time_profiles = {
      [T = cfg.horizon](double t) { return 1.0 - t / T; },
      [T = cfg.horizon](double t) { return (1.0 - t / T) * (1.0 - t / T); },
      [T = cfg.horizon](double t) { return std::cos(std::numbers::pi * t / (2 * T)); }};

  std::vector<Eigen::VectorXd> space_modes;
  space_modes.push_back(Eigen::VectorXd::Ones(mesh.n_bulk()));
  space_modes.push_back(mesh.bulk_nodes.col(0));
  if (mesh.kind == MeshKind::disk) {
    space_modes.push_back(mesh.bulk_nodes.col(1));
    Eigen::VectorXd r2(mesh.n_bulk());
    for (int i = 0; i < mesh.n_bulk(); ++i)
      r2[i] = 1.0 - (mesh.bulk_nodes.row(i).squaredNorm()) / (mesh.radius * mesh.radius);
    space_modes.push_back(r2);
  }

  double worst = 0.0;
  for (const auto& profile : time_profiles) {
    for (const auto& mode : space_modes) {
      double pairing = 0.0, test_norm_sq = 0.0;
      for (int n = 0; n < M; ++n) {
        const double w = profile(cfg.stage_time(n));
        pairing += w * mode.dot(defect[n]);
        test_norm_sq += dt * w * w * mode.cwiseAbs2().dot(op.mass);
      }
      if (test_norm_sq > 0.0) worst = std::max(worst, std::abs(pairing) / std::sqrt(test_norm_sq));
    }
  }
  return worst;
}

}  // namespace dynbc

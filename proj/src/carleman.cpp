#include "dynbc/carleman.hpp"

#include <cmath>
#include <stdexcept>

namespace dynbc {

double CarlemanWeights::gap(double eta) const {
  return std::exp(2.0 * lambda * m * eta0_max) - peak(eta);
}

double CarlemanWeights::peak(double eta) const {
  return std::exp(lambda * (m * eta0_max + eta));
}

namespace {

void check_interior_time(double t, double T, const char* who) {
  if (t <= 0.0 || t >= T)
    throw std::domain_error(std::string(who) + ": singular at t = 0 and t = T");
}

}  // namespace

double CarlemanWeights::alpha(double t, double eta) const {
  check_interior_time(t, horizon, "alpha");
  return gap(eta) / (t * (horizon - t));
}

double CarlemanWeights::xi(double t, double eta) const {
  check_interior_time(t, horizon, "xi");
  return peak(eta) / (t * (horizon - t));
}

double CarlemanWeights::alpha_tilde(double t, double eta) const {
  if (t < 0.0 || t >= horizon) throw std::domain_error("alpha_tilde: singular at t = T");
  return gap(eta) / (horizon * (horizon - t));
}

double CarlemanWeights::xi_tilde(double t, double eta) const {
  if (t < 0.0 || t >= horizon) throw std::domain_error("xi_tilde: singular at t = T");
  return peak(eta) / (horizon * (horizon - t));
}

double CarlemanWeights::log_xi_tilde(double t, double eta) const {
  if (t < 0.0 || t >= horizon) throw std::domain_error("xi_tilde: singular at t = T");
  return lambda * (m * eta0_max + eta) - std::log(horizon * (horizon - t));
}

double CarlemanWeights::rho_eps(double t, double eta, double eps) const {
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("rho_eps: need eps in (0, 1]");
  if (t < 0.0 || t > horizon) throw std::domain_error("rho_eps: t outside [0, T]");
  // s alpha~ (T-t)/(T-t+eps) collapses to s gap(eta) / (T (T-t+eps)), which
  // is finite on all of [0, T].
  return std::exp(s * gap(eta) / (horizon * (horizon - t + eps)));
}

L2Pair CarlemanWeights::damping(double t) const {
  const int nb = static_cast<int>(eta0.size());
  L2Pair w{Eigen::VectorXd(nb), Eigen::VectorXd(n_boundary)};
  if (t <= 0.0 || t >= horizon) {
    w.bulk.setZero();
    w.surface.setZero();
    return w;  // continuous extension by zero
  }
  const double inv = 1.0 / (t * (horizon - t));
  for (int i = 0; i < nb; ++i) w.bulk[i] = std::exp(-2.0 * s * gap(eta0[i]) * inv);
  w.surface.setConstant(std::exp(-2.0 * s * gap(0.0) * inv));
  return w;
}

L2Pair CarlemanWeights::xi_pair(double t) const {
  const int nb = static_cast<int>(eta0.size());
  L2Pair w{Eigen::VectorXd(nb), Eigen::VectorXd(n_boundary)};
  const double inv = 1.0 / (t * (horizon - t));
  for (int i = 0; i < nb; ++i) w.bulk[i] = peak(eta0[i]) * inv;
  w.surface.setConstant(peak(0.0) * inv);
  return w;
}

L2Pair CarlemanWeights::rho_pair(double t, double eps) const {
  const int nb = static_cast<int>(eta0.size());
  L2Pair w{Eigen::VectorXd(nb), Eigen::VectorXd(n_boundary)};
  for (int i = 0; i < nb; ++i) w.bulk[i] = rho_eps(t, eta0[i], eps);
  w.surface.setConstant(rho_eps(t, 0.0, eps));
  return w;
}

double CarlemanWeights::max_rho_exponent(const EvolutionConfig& cfg, double eps) const {
  // gap is largest at eta = 0; the exponent peaks at t = T.
  double worst = 0.0;
  for (int m_ = 0; m_ <= cfg.steps; ++m_) {
    const double t = cfg.node_time(m_);
    worst = std::max(worst, s * gap(0.0) / (horizon * (horizon - t + eps)));
  }
  return worst;
}

Eigen::VectorXd build_eta0(const Mesh& mesh, const ControlRegion& omega_prime) {
  if (mesh.kind != MeshKind::disk)
    throw std::invalid_argument(
        "build_eta0: interval geometry unsupported; the Carleman machinery needs surface "
        "diffusion (delta > 0) on a genuine boundary manifold");
  if (omega_prime.indicator.size() != mesh.n_bulk())
    throw std::invalid_argument("build_eta0: region does not match mesh");
  if (omega_prime.indicator[0] == 0.0)
    throw std::invalid_argument(
        "build_eta0: omega' must contain the origin; the quadratic eta0 has its only critical "
        "point there and the general construction is out of scope");
  const double R2 = mesh.radius * mesh.radius;
  Eigen::VectorXd eta0(mesh.n_bulk());
  for (int i = 0; i < mesh.n_bulk(); ++i)
    eta0[i] = R2 - mesh.bulk_nodes.row(i).squaredNorm();
  for (int k : mesh.boundary_to_bulk) eta0[k] = 0.0;  // exact on the ring
  return eta0;
}

CarlemanWeights make_weights(const Mesh& mesh, Eigen::VectorXd eta0, double s, double lambda,
                             double m, double horizon) {
  if (lambda < 1.0 || s < 1.0) throw std::invalid_argument("make_weights: need lambda, s >= 1");
  if (!(m > 1.0)) throw std::invalid_argument("make_weights: need m > 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("make_weights: need T > 0");
  if (eta0.size() != mesh.n_bulk()) throw std::invalid_argument("make_weights: eta0 size mismatch");
  CarlemanWeights cw;
  cw.s = s;
  cw.lambda = lambda;
  cw.m = m;
  cw.horizon = horizon;
  cw.eta0 = std::move(eta0);
  cw.eta0_max = cw.eta0.cwiseAbs().maxCoeff();
  cw.n_boundary = mesh.n_boundary();
  return cw;
}

double CarlemanRatioReport::lhs() const {
  double t = 0.0;
  for (double x : lhs_terms) t += x;
  return t;
}

double CarlemanRatioReport::rhs() const {
  double t = 0.0;
  for (double x : rhs_terms) t += x;
  return t;
}

CarlemanRatioReport carleman_ratio(const Trajectory& phi, const DiscreteOperator& op,
                                   const PotentialPair& pot, const CarlemanWeights& cw,
                                   const ControlRegion& omega, const EvolutionConfig& cfg) {
  const Mesh& mesh = op.mesh;
  if (mesh.kind != MeshKind::disk || !(op.delta > 0.0))
    throw std::invalid_argument("carleman_ratio: needs the disk geometry with delta > 0");
  if (phi.steps() != cfg.steps)
    throw std::invalid_argument("carleman_ratio: trajectory grid does not match config");
  if (time_l2_norm(phi, mesh) < 1e-300)
    throw std::invalid_argument("carleman_ratio: phi vanishes, ratio undefined");

  const int M = cfg.steps;
  const double dt = cfg.dt();
  const double s = cw.s, lam = cw.lambda;
  const int ring_start = 1 + (mesh.n_r - 1) * mesh.n_theta;

  CarlemanRatioReport rep;

  std::vector<Eigen::VectorXd> coupled(static_cast<size_t>(M) + 1);
  for (int k = 0; k <= M; ++k) coupled[k] = op.to_coupled(phi.at(k));

  for (int k = 1; k < M; ++k) {
    const double t = cfg.node_time(k);
    const Eigen::VectorXd& u = coupled[k];
    const Eigen::VectorXd surf = mesh.trace(u);

    const Eigen::VectorXd dudt = (coupled[k + 1] - coupled[k - 1]) / (2 * dt);
    const Eigen::VectorXd dsdt = mesh.trace(dudt);

    // d Delta phi at interior bulk nodes (the boundary ring row mixes bulk
    // and surface contributions and is accounted on the boundary side)
    const Eigen::VectorXd a_apply = -(op.stiffness * u).cwiseQuotient(op.mass);
    const Eigen::VectorXd grad_sq = bulk_gradient_sq(mesh, u);
    const Eigen::VectorXd lb = laplace_beltrami(mesh, surf);
    const Eigen::VectorXd sgrad_sq = surface_gradient_sq(mesh, surf);
    const Eigen::VectorXd dnu = normal_derivative(mesh, u);

    const Eigen::VectorXd av = pot.eval_a(t, mesh.n_bulk());
    const Eigen::VectorXd bv = pot.eval_b(t, mesh.n_boundary());

    for (int i = 0; i < ring_start; ++i) {
      const double w = mesh.bulk_weights[i] * dt;
      const double e2sa = std::exp(-2.0 * s * cw.gap(cw.eta0[i]) / (t * (cw.horizon - t)));
      if (e2sa == 0.0) continue;
      const double xiv = cw.xi(t, cw.eta0[i]);
      const double lap = a_apply[i] / op.d;  // Delta phi
      const double pt = dudt[i];
      rep.lhs_terms[0] += w * e2sa / (s * xiv) * (pt * pt + lap * lap);
      rep.lhs_terms[2] += w * e2sa * s * lam * lam * xiv * grad_sq[i];
      rep.lhs_terms[4] += w * e2sa * s * s * s * lam * lam * lam * lam * xiv * xiv * xiv * u[i] * u[i];
      const double res = pt + op.d * lap - av[i] * u[i];
      rep.rhs_terms[1] += w * e2sa * res * res;
      if (omega.indicator[i] != 0.0)
        rep.rhs_terms[0] += w * e2sa * s * s * s * lam * lam * lam * lam * xiv * xiv * xiv * u[i] * u[i];
    }

    const double e2sa_b = std::exp(-2.0 * s * cw.gap(0.0) / (t * (cw.horizon - t)));
    if (e2sa_b == 0.0) continue;
    const double xib = cw.xi(t, 0.0);
    for (int j = 0; j < mesh.n_boundary(); ++j) {
      const double w = mesh.boundary_weights[j] * dt;
      const double pt = dsdt[j];
      rep.lhs_terms[1] += w * e2sa_b / (s * xib) * (pt * pt + lb[j] * lb[j]);
      rep.lhs_terms[3] += w * e2sa_b * s * lam * xib * sgrad_sq[j];
      rep.lhs_terms[5] += w * e2sa_b * s * s * s * lam * lam * lam * xib * xib * xib * surf[j] * surf[j];
      rep.lhs_terms[6] += w * e2sa_b * s * lam * xib * dnu[j] * dnu[j];
      const double res = pt + op.delta * lb[j] - op.d * dnu[j] - bv[j] * surf[j];
      rep.rhs_terms[2] += w * e2sa_b * res * res;
    }
  }

  const double rhs = rep.rhs();
  if (rhs == 0.0) {
    if (rep.lhs() > 0.0)
      throw std::runtime_error("carleman_ratio: rhs vanished with nonzero lhs (anomaly)");
    throw std::invalid_argument("carleman_ratio: both sides vanish, ratio undefined");
  }
  rep.ratio = rep.lhs() / rhs;
  return rep;
}

}  // namespace dynbc

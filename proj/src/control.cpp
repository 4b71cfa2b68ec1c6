#include "dynbc/control.hpp"

#include "cg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dynbc {

namespace {

std::string history_tail(const std::vector<double>& h) {
  std::ostringstream os;
  const size_t n = h.size();
  os << "[";
  for (size_t i = (n > 6 ? n - 6 : 0); i < n; ++i) os << (i ? " " : "") << h[i];
  os << "]";
  return os.str();
}

CgDiagnostics to_diag(const detail::CgOutcome& out) {
  return {out.iterations, out.residual, out.converged, out.history};
}

}  // namespace

std::function<Eigen::VectorXd(double)> StepControl::evaluator() const {
  const double dt = horizon / steps();
  const int M = steps();
  return [values = values, dt, theta = theta, M](double t) {
    int n = static_cast<int>(std::lround(t / dt - theta));
    n = std::min(std::max(n, 0), M - 1);
    return values.col(n).eval();
  };
}

void StepControl::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "t,node_id,component,value\n");
  const double dt = horizon / steps();
  for (int n = 0; n < steps(); ++n) {
    const double t = (n + theta) * dt;
    for (int i = 0; i < values.rows(); ++i)
      std::fprintf(f, "%.17g,%d,bulk,%.17g\n", t, i, values(i, n));
  }
  std::fclose(f);
}

ControlMaps::ControlMaps(const DiscreteOperator& op, const PotentialPair& pot,
                         const ControlRegion* region, const EvolutionConfig& cfg)
    : op_(&op), region_(region), cfg_(cfg), stepper_(op, pot, cfg) {
  if (region && region->indicator.size() != op.mesh.n_bulk())
    throw std::invalid_argument("ControlMaps: region does not match mesh");
}

Eigen::MatrixXd ControlMaps::mask(Eigen::MatrixXd v) const {
  if (region_) v.array().colwise() *= region_->indicator.array();
  return v;
}

Eigen::MatrixXd ControlMaps::adjoint(const std::function<L2Pair(int)>& nodal_dual,
                                     const L2Pair* terminal_dual) const {
  const int M = cfg_.steps;
  Eigen::VectorXd terminal = terminal_dual ? op_->to_coupled(*terminal_dual)
                                           : Eigen::VectorXd::Zero(op_->size()).eval();
  std::function<Eigen::VectorXd(int)> nodal;
  if (nodal_dual)
    nodal = [this, &nodal_dual](int n) { return op_->to_coupled(nodal_dual(n)); };
  const auto sweep = stepper_.adjoint(terminal, nodal, false);

  Eigen::MatrixXd out(op_->size(), M);
  for (int n = 0; n < M; ++n) out.col(n) = sweep.stages[static_cast<size_t>(n)];
  return mask(std::move(out));
}

Eigen::MatrixXd ControlMaps::observe(const L2Pair& phi_T) const {
  return adjoint(nullptr, &phi_T);
}

ControlMaps::Observation ControlMaps::observe_full(const L2Pair& phi_T) const {
  const int M = cfg_.steps;
  const auto sweep = stepper_.adjoint(op_->to_coupled(phi_T), nullptr, false);
  Eigen::MatrixXd out(op_->size(), M);
  for (int n = 0; n < M; ++n) out.col(n) = sweep.stages[static_cast<size_t>(n)];
  return {mask(std::move(out)), op_->from_coupled(sweep.q0)};
}

std::vector<Eigen::VectorXd> ControlMaps::propagate(const Eigen::MatrixXd& v) const {
  const double dt = cfg_.dt();
  const int M = cfg_.steps;
  const Eigen::VectorXd& weights = region_ ? op_->mesh.bulk_weights : op_->mass;
  auto load = [&v, &weights, dt, theta = cfg_.theta, M](double t) {
    int n = static_cast<int>(std::lround(t / dt - theta));
    n = std::min(std::max(n, 0), M - 1);
    return weights.cwiseProduct(v.col(n)).eval();
  };
  return stepper_.forward(Eigen::VectorXd::Zero(op_->size()), load);
}

L2Pair ControlMaps::final_state(const Eigen::MatrixXd& v) const {
  return op_->from_coupled(propagate(v).back());
}

L2Pair ControlMaps::gramian(const L2Pair& phi_T) const { return final_state(observe(phi_T)); }

Trajectory ControlMaps::simulate(const SourceData& src) const {
  std::function<Eigen::VectorXd(double)> load;
  if (src.f || src.g || src.v)
    load = [this, &src](double t) { return stepper_.source_load(src, t); };
  const auto u = stepper_.forward(op_->to_coupled(src.y0), load);
  Trajectory tr;
  tr.horizon = cfg_.horizon;
  tr.states.reserve(u.size());
  tr.states.push_back(src.y0);
  for (size_t m = 1; m < u.size(); ++m) tr.states.push_back(op_->from_coupled(u[m]));
  return tr;
}

double ControlMaps::control_dot(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w) const {
  const Eigen::VectorXd& weights = region_ ? op_->mesh.bulk_weights : op_->mass;
  return cfg_.dt() * (weights.transpose() * v.cwiseProduct(w)).sum();
}

ControlResult penalized_hum(const DiscreteOperator& op, const PotentialPair& pot,
                            const std::function<Eigen::VectorXd(double)>& f,
                            const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                            const ControlRegion& region, const EvolutionConfig& cfg,
                            const HumParams& params) {
  if (!(params.epsilon > 0.0)) throw std::invalid_argument("penalized_hum: need epsilon > 0");
  ControlMaps maps(op, pot, &region, cfg);

  SourceData free_data{f, g, nullptr, nullptr, y0};
  const Trajectory y_free = maps.simulate(free_data);
  L2Pair b = y_free.states.back();
  b *= -1.0;

  auto apply = [&maps, &params](const L2Pair& phi) {
    L2Pair out = maps.gramian(phi);
    out += params.epsilon * phi;
    return out;
  };
  auto dot = [&op](const L2Pair& a, const L2Pair& c) { return inner(a, c, op.mesh); };

  L2Pair phi_hat = L2Pair::zero(op.mesh);
  const auto outcome =
      detail::conjugate_gradient(apply, b, phi_hat, dot, params.cg_tol, params.cg_max_iter);
  if (!outcome.converged)
    throw std::runtime_error("penalized_hum: CG did not converge in " +
                             std::to_string(params.cg_max_iter) +
                             " iterations; residual history tail " + history_tail(outcome.history));

  ControlResult res;
  res.minimizer_phi_T = phi_hat;
  res.v = StepControl{cfg.horizon, cfg.theta, maps.observe(phi_hat)};
  res.diag = to_diag(outcome);

  SourceData controlled{f, g, res.v.evaluator(), &region, y0};
  res.y = maps.simulate(controlled);
  res.terminal_norm = norm(res.y.states.back(), op.mesh);
  res.control_energy = 0.5 * maps.control_dot(res.v.values, res.v.values);
  return res;
}

double weighted_data_norm(const std::function<Eigen::VectorXd(double)>& h, bool bulk_component,
                          const DiscreteOperator& op, const CarlemanWeights& cw,
                          const EvolutionConfig& cfg) {
  if (!h) return 0.0;
  const Mesh& mesh = op.mesh;
  const int M = cfg.steps;
  const double dt = cfg.dt();
  long double acc = 0.0L;
  for (int m = 0; m < M; ++m) {  // t = T is the singular endpoint: contributes zero
    const double t = cfg.node_time(m);
    const double tau = (m == 0) ? dt / 2 : dt;
    const Eigen::VectorXd values = h(t);
    const int count = bulk_component ? mesh.n_bulk() : mesh.n_boundary();
    if (values.size() != count) throw std::invalid_argument("weighted_data_norm: size mismatch");
    for (int i = 0; i < count; ++i) {
      const double val = values[i];
      if (val == 0.0) continue;
      const double eta = bulk_component ? cw.eta0[i] : 0.0;
      const double expo =
          2.0 * (cw.s * cw.alpha_tilde(t, eta) - 1.5 * cw.log_xi_tilde(t, eta) + std::log(std::abs(val)));
      if (expo > 700.0)
        throw std::invalid_argument(
            "weighted_data_norm: data is not in the weighted class (no decay at t = T); "
            "weight overflow at t = " + std::to_string(t));
      const double w = bulk_component ? mesh.bulk_weights[i] : mesh.boundary_weights[i];
      acc += static_cast<long double>(tau * w) * std::exp(static_cast<long double>(expo));
    }
  }
  const double out = static_cast<double>(acc);
  if (!std::isfinite(out))
    throw std::invalid_argument("weighted_data_norm: accumulated weighted norm overflows");
  return std::sqrt(out);
}

namespace {

struct WeightedOperator {
  const ControlMaps& maps;
  const DiscreteOperator& op;
  const std::vector<L2Pair>& rho;  // per node
  double mu;
  double dt;

  L2Pair weighted_dual(const L2Pair& state, int m, int M) const {
    const double tau = (m == 0 || m == M) ? dt / 2 : dt;
    L2Pair d = state;
    d.bulk.array() *= tau * rho[static_cast<size_t>(m)].bulk.array().square();
    d.surface.array() *= tau * rho[static_cast<size_t>(m)].surface.array().square();
    return d;
  }

  // L^* P_rho applied to a state trajectory given as coupled vectors plus
  // the (1/mu) L_T^* of its final state, fused into one sweep.
  Eigen::MatrixXd adjoint_of(const std::vector<Eigen::VectorXd>& coupled,
                             const L2Pair* state0) const {
    const int M = maps.config().steps;
    auto nodal = [this, &coupled, state0, M](int n) {
      const L2Pair y = (n == 0 && state0) ? *state0 : op.from_coupled(coupled[static_cast<size_t>(n)]);
      return weighted_dual(y, n, M);
    };
    L2Pair yT = op.from_coupled(coupled[static_cast<size_t>(M)]);
    L2Pair terminal = weighted_dual(yT, M, M);
    terminal += (1.0 / mu) * yT;
    return maps.adjoint(nodal, &terminal);
  }

  Eigen::MatrixXd operator()(const Eigen::MatrixXd& v) const {
    const auto states = maps.propagate(v);
    Eigen::MatrixXd out = adjoint_of(states, nullptr);
    out += v;
    return out;
  }
};

}  // namespace

ControlResult weighted_minimal_control(const DiscreteOperator& op, const PotentialPair& pot,
                                       const std::function<Eigen::VectorXd(double)>& f,
                                       const std::function<Eigen::VectorXd(double)>& g,
                                       const L2Pair& y0, const ControlRegion& region,
                                       const CarlemanWeights& cw, const EvolutionConfig& cfg,
                                       const WeightedParams& params) {
  if (!(params.mu > 0.0)) throw std::invalid_argument("weighted_minimal_control: need mu > 0");
  if (!(params.eps_rho > 0.0) || params.eps_rho > 1.0)
    throw std::invalid_argument("weighted_minimal_control: need eps_rho in (0, 1]");
  if (cw.max_rho_exponent(cfg, params.eps_rho) > 340.0)
    throw std::invalid_argument(
        "weighted_minimal_control: weight overflow (s too large for this grid and eps_rho); "
        "reduce s or lambda, enlarge eps_rho, or refine the setup");

  // membership of the data in the weighted classes (decay at t = T)
  weighted_data_norm(f, true, op, cw, cfg);
  weighted_data_norm(g, false, op, cw, cfg);

  ControlMaps maps(op, pot, &region, cfg);
  const int M = cfg.steps;

  std::vector<L2Pair> rho;
  rho.reserve(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) rho.push_back(cw.rho_pair(cfg.node_time(m), params.eps_rho));

  WeightedOperator A{maps, op, rho, params.mu, cfg.dt()};

  SourceData free_data{f, g, nullptr, nullptr, y0};
  const Trajectory y_free = maps.simulate(free_data);
  std::vector<Eigen::VectorXd> free_coupled(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) free_coupled[static_cast<size_t>(m)] = op.to_coupled(y_free.at(m));
  Eigen::MatrixXd b = A.adjoint_of(free_coupled, &y_free.states.front());
  b *= -1.0;

  auto dot = [&maps](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return maps.control_dot(x, y);
  };
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(op.size(), M);
  const auto outcome = detail::conjugate_gradient(A, b, v, dot, params.cg_tol, params.cg_max_iter);
  if (!outcome.converged)
    throw std::runtime_error("weighted_minimal_control: CG did not converge in " +
                             std::to_string(params.cg_max_iter) +
                             " iterations; residual history tail " + history_tail(outcome.history));

  ControlResult res;
  res.v = StepControl{cfg.horizon, cfg.theta, maps.mask(v)};
  res.diag = to_diag(outcome);

  SourceData controlled{f, g, res.v.evaluator(), &region, y0};
  res.y = maps.simulate(controlled);
  res.terminal_norm = norm(res.y.states.back(), op.mesh);
  res.control_energy = 0.5 * maps.control_dot(res.v.values, res.v.values);
  double wse = 0.0;
  for (int m = 0; m <= M; ++m) {
    const double tau = (m == 0 || m == M) ? cfg.dt() / 2 : cfg.dt();
    L2Pair wy = res.y.at(m);
    wy.bulk.array() *= rho[static_cast<size_t>(m)].bulk.array();
    wy.surface.array() *= rho[static_cast<size_t>(m)].surface.array();
    wse += tau * inner(wy, wy, op.mesh);
  }
  res.weighted_state_energy = 0.5 * wse;
  res.terminal_penalty = res.terminal_norm * res.terminal_norm / (2.0 * params.mu);
  return res;
}

double weighted_objective(const DiscreteOperator& op, const PotentialPair& pot,
                          const std::function<Eigen::VectorXd(double)>& f,
                          const std::function<Eigen::VectorXd(double)>& g, const L2Pair& y0,
                          const ControlRegion& region, const CarlemanWeights& cw,
                          const EvolutionConfig& cfg, const WeightedParams& params,
                          const StepControl& v) {
  ControlMaps maps(op, pot, &region, cfg);
  SourceData controlled{f, g, v.evaluator(), &region, y0};
  const Trajectory y = maps.simulate(controlled);
  const int M = cfg.steps;
  double wse = 0.0;
  for (int m = 0; m <= M; ++m) {
    const double tau = (m == 0 || m == M) ? cfg.dt() / 2 : cfg.dt();
    const L2Pair rho = cw.rho_pair(cfg.node_time(m), params.eps_rho);
    L2Pair wy = y.at(m);
    wy.bulk.array() *= rho.bulk.array();
    wy.surface.array() *= rho.surface.array();
    wse += tau * inner(wy, wy, op.mesh);
  }
  const double tn = norm(y.states.back(), op.mesh);
  return 0.5 * wse + 0.5 * maps.control_dot(v.values, v.values) + tn * tn / (2.0 * params.mu);
}

}  // namespace dynbc

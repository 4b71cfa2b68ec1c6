#include "dynbc/observability.hpp"

#include "cg.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dynbc {

namespace {

bool full_observation(const ControlRegion& region) {
  return (region.indicator.array() > 0.0).all();
}

L2Pair random_pair(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  L2Pair z = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i) z.bulk[i] = gauss(rng);
  for (int k = 0; k < mesh.n_boundary(); ++k) z.surface[k] = gauss(rng);
  return z;
}

// Hutchinson estimate of tr(Lambda) in the L2 inner product: probes with
// identity covariance have coefficients g_i / sqrt(w_i).
double trace_estimate(const ControlMaps& maps, std::mt19937_64& rng, int probes) {
  const Mesh& mesh = maps.op().mesh;
  double acc = 0.0;
  for (int p = 0; p < probes; ++p) {
    L2Pair z = random_pair(mesh, rng);
    z.bulk.array() /= mesh.bulk_weights.array().sqrt();
    z.surface.array() /= mesh.boundary_weights.array().sqrt();
    const Eigen::MatrixXd s = maps.observe(z);
    acc += maps.control_dot(s, s);  // <Lambda z, z>
  }
  return acc / probes;
}

ObservabilityReport power_iteration(const ControlMaps& maps, const DiscreteOperator& op,
                                    const ObservabilityParams& params) {
  const Mesh& mesh = op.mesh;
  std::mt19937_64 rng(params.seed);

  const double tr = trace_estimate(maps, rng, 3);
  const double shift = std::max(1e-10 * tr, 1e-300);

  // start with the constant pair plus a random perturbation
  L2Pair x = L2Pair::constant(mesh, 1.0, 1.0);
  {
    L2Pair noise = random_pair(mesh, rng);
    noise *= 0.1 / std::max(norm(noise, mesh), 1e-300);
    x += noise;
  }
  x *= 1.0 / norm(x, mesh);

  auto pair_dot = [&mesh](const L2Pair& a, const L2Pair& b) { return inner(a, b, mesh); };
  auto lambda_shifted = [&maps, shift](const L2Pair& phi) {
    L2Pair out = maps.final_state(maps.observe(phi));
    out += shift * phi;
    return out;
  };

  ObservabilityReport rep;
  rep.shift = shift;
  double previous = 0.0;

  for (int it = 0; it < params.max_outer; ++it) {
    const auto obs = maps.observe_full(x);
    const double num = inner(obs.initial, obs.initial, mesh);
    const double den = maps.control_dot(obs.stages, obs.stages);
    if (den <= 0.0)
      throw std::runtime_error("observability: observation energy vanished during iteration");
    const double quotient = num / den;

    // R*R x: propagate phi(0) forward and read the final state
    const auto states = maps.stepper().forward(op.to_coupled(obs.initial), nullptr);
    const L2Pair rr = op.from_coupled(states.back());

    rep.constant = quotient;
    rep.iterations = it + 1;
    if (it > 0 && std::abs(quotient - previous) <= params.tol * std::abs(quotient)) {
      const L2Pair lam_x = maps.final_state(obs.stages);
      L2Pair resid = rr;
      resid -= quotient * lam_x;
      rep.residual = norm(resid, mesh) / std::max(norm(rr, mesh), 1e-300);
      if (rep.residual <= params.residual_tol) {
        rep.maximizer = x;
        rep.maximizer_quotient = quotient;
        return rep;
      }
    }
    previous = quotient;

    L2Pair z = x;  // warm start
    const auto cg = detail::conjugate_gradient(lambda_shifted, rr, z, pair_dot, params.cg_tol,
                                               params.cg_max_iter);
    if (!cg.converged) {
      std::ostringstream msg;
      msg << "observability: inner CG stagnated (shift " << shift << ", iterations "
          << cg.iterations << ", residual " << cg.residual << ")";
      throw std::runtime_error(msg.str());
    }
    x = z;
    x *= 1.0 / norm(x, mesh);
  }
  throw std::runtime_error("observability: power iteration did not converge in " +
                           std::to_string(params.max_outer) + " iterations (last quotient " +
                           std::to_string(rep.constant) + ")");
}

}  // namespace

double observation_energy(const DiscreteOperator& op, const PotentialPair& pot,
                          const ControlRegion& region, const EvolutionConfig& cfg,
                          const L2Pair& phi_T) {
  ControlMaps maps(op, pot, full_observation(region) ? nullptr : &region, cfg);
  const Eigen::MatrixXd s = maps.observe(phi_T);
  return maps.control_dot(s, s);
}

ObservabilityReport estimate_backward_observability(const DiscreteOperator& op,
                                                    const PotentialPair& pot,
                                                    const ControlRegion& region,
                                                    const EvolutionConfig& cfg,
                                                    const ObservabilityParams& params) {
  if (region.indicator.size() != op.mesh.n_bulk())
    throw std::invalid_argument("estimate_backward_observability: region does not match mesh");
  if (region.indicator.sum() == 0.0)
    throw std::invalid_argument("estimate_backward_observability: empty observation region");
  if (!(params.tol > 0.0))
    throw std::invalid_argument("estimate_backward_observability: need tol > 0");
  ControlMaps maps(op, pot, full_observation(region) ? nullptr : &region, cfg);
  return power_iteration(maps, op, params);
}

ForwardFinalStateReport check_forward_final_state(const DiscreteOperator& op,
                                                  const PotentialPair& pot,
                                                  const ControlRegion& region,
                                                  const EvolutionConfig& cfg,
                                                  const std::vector<L2Pair>& samples,
                                                  double backward_constant, double tolerance) {
  if (samples.empty())
    throw std::invalid_argument("check_forward_final_state: empty sample set");
  const bool full = full_observation(region);
  ForwardFinalStateReport rep;
  rep.backward_constant = backward_constant;
  ThetaStepper stepper(op, pot, cfg);
  const int M = cfg.steps;
  const double dt = cfg.dt();
  const Eigen::VectorXd& weights = full ? op.mass : op.mesh.bulk_weights;
  for (const auto& y0 : samples) {
    const auto u = stepper.forward(op.to_coupled(y0), nullptr);
    double energy = 0.0;
    for (int n = 0; n < M; ++n) {
      Eigen::VectorXd stage =
          (1.0 - cfg.theta) * u[static_cast<size_t>(n)] + cfg.theta * u[static_cast<size_t>(n + 1)];
      if (!full) stage = region.indicator.cwiseProduct(stage);
      energy += dt * stage.cwiseAbs2().dot(weights);
    }
    const L2Pair yT = op.from_coupled(u.back());
    const double q = inner(yT, yT, op.mesh) / energy;
    rep.quotients.push_back(q);
    rep.max_quotient = std::max(rep.max_quotient, q);
  }
  rep.within_backward_bound = rep.max_quotient <= backward_constant * (1.0 + tolerance);
  return rep;
}

}  // namespace dynbc

#include "dynbc/verify.hpp"

#include "dynbc/experiment.hpp"
#include "dynbc/semilinear.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace dynbc {

namespace {

// Regression pins, measured on the first verified run of this suite and
// frozen (asserted with the documented slack factors).
constexpr double kHumTerminalRatioPin = 5.15e-3;    // terminal_norm/|y0| at eps = 1e-4
constexpr double kWeightedCostConstantPin = 26.2;   // data-sweep cost constant
constexpr double kCarlemanKappaPin = 0.179;         // max sweep ratio
constexpr int kPicardIterationPin = 2;              // accepted iteration count

struct Fmt {
  std::ostringstream os;
  template <class T>
  Fmt& operator<<(const T& v) {
    os << v;
    return *this;
  }
  operator std::string() const { return os.str(); }
};

CheckResult check(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok, detail};
}

L2Pair random_pair(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  L2Pair z = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i) z.bulk[i] = gauss(rng);
  for (int k = 0; k < mesh.n_boundary(); ++k) z.surface[k] = gauss(rng);
  return z;
}

L2Pair smooth_random_pair(const DiscreteOperator& op, std::mt19937_64& rng) {
  L2Pair z = random_pair(op.mesh, rng);
  EvolutionConfig cfg;
  cfg.horizon = 1e-3;
  cfg.steps = 4;
  SourceData src{nullptr, nullptr, nullptr, nullptr, z};
  PotentialPair none;
  L2Pair out = solve_forward(op, none, src, cfg).states.back();
  const double s = norm(out, op.mesh);
  if (s > 0) out *= 1.0 / s;
  return out;
}

struct DiskSetup {
  Mesh mesh;
  DiscreteOperator op;
  ControlRegion omega;
  EvolutionConfig cfg;
};

DiskSetup default_disk(int n_r = 16, int n_theta = 64, int steps = 200, double horizon = 1.0) {
  DiskSetup s{build_disk_mesh(n_r, n_theta, 1.0), {}, {}, {}};
  s.op = assemble(s.mesh, 1.0, 1.0);
  s.omega = control_mask(s.mesh, DiskRegion{0.0, 0.0, 0.5});
  s.cfg.horizon = horizon;
  s.cfg.steps = steps;
  s.cfg.theta = 0.5;
  return s;
}

double mass_functional(const L2Pair& y, const Mesh& mesh) {
  return y.bulk.dot(mesh.bulk_weights) + y.surface.dot(mesh.boundary_weights);
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int k = 0; k < 200; ++k) {
    const double mid = (lo + hi) / 2;
    const double fm = f(mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace

Suite check_operator_structure() {
  Suite suite;
  const DiskSetup s = default_disk();
  const Eigen::SparseMatrix<double>& K = s.op.stiffness;
  const double kmax = Eigen::MatrixXd(K).cwiseAbs().maxCoeff();

  Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(K.transpose()) - K;
  const double asym = Eigen::MatrixXd(diff).cwiseAbs().maxCoeff();
  suite.push_back(check("stiffness symmetric", asym <= 1e-12 * kmax,
                        Fmt() << "max|K - K^T| = " << asym << ", max|K| = " << kmax));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  bool psd = true;
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    Eigen::VectorXd y(s.op.size());
    for (int i = 0; i < y.size(); ++i) y[i] = gauss(rng);
    const double q = y.dot(K * y);
    worst = std::min(worst, q / y.squaredNorm());
    if (q < -1e-12 * y.squaredNorm()) psd = false;
  }
  suite.push_back(check("stiffness positive semidefinite", psd,
                        Fmt() << "min Rayleigh quotient over 100 probes = " << worst));

  const Eigen::VectorXd k1 = K * Eigen::VectorXd::Ones(s.op.size());
  suite.push_back(check("constants in kernel", k1.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, kmax),
                        Fmt() << "max|K 1| = " << k1.cwiseAbs().maxCoeff()));
  return suite;
}

Suite check_conservation_stability() {
  Suite suite;
  const DiskSetup s = default_disk();
  std::mt19937_64 rng(12);
  L2Pair y0 = random_pair(s.mesh, rng);
  PotentialPair none;
  SourceData src{nullptr, nullptr, nullptr, nullptr, y0};
  const Trajectory y = solve_forward(s.op, none, src, s.cfg);

  const double m0 = mass_functional(y.states.front(), s.mesh);
  double drift = 0.0;
  for (const auto& state : y.states)
    drift = std::max(drift, std::abs(mass_functional(state, s.mesh) - m0));
  drift /= std::max(std::abs(m0), 1e-300);
  suite.push_back(
      check("mass functional conserved", drift <= 1e-11, Fmt() << "relative drift = " << drift));

  bool monotone = true;
  double prev = norm(y.states.front(), s.mesh);
  // the first stored state is the raw pair; the scheme starts at its
  // coupled projection, whose norm is never larger
  for (int m = 1; m <= y.steps(); ++m) {
    const double cur = norm(y.at(m), s.mesh);
    if (cur > prev * (1.0 + 1e-12)) monotone = false;
    prev = cur;
  }
  suite.push_back(check("stepwise norm nonincreasing", monotone, Fmt() << "final/initial = "
                                                                       << prev / norm(y0, s.mesh)));
  return suite;
}

Suite check_spectral_regression() {
  Suite suite;
  const Mesh mesh = build_interval_mesh(200, 1.0);
  const DiscreteOperator op = assemble(mesh, 1.0, 0.0);
  const SpectrumResult spec = spectrum_smallest(op, 4);

  suite.push_back(check("zero eigenvalue with constant mode",
                        std::abs(spec.values[0]) <= 1e-10 &&
                            (spec.modes[0].bulk.maxCoeff() - spec.modes[0].bulk.minCoeff()) <= 1e-6,
                        Fmt() << "lambda_0 = " << spec.values[0]));

  // separation of variables: symmetric modes solve tan(mu/2) = -mu,
  // antisymmetric ones tan(mu/2) = 1/mu
  const double mu_sym = bisect([](double mu) { return std::tan(mu / 2) + mu; },
                               std::numbers::pi + 1e-9, 2 * std::numbers::pi - 1e-9);
  const double mu_anti =
      bisect([](double mu) { return std::tan(mu / 2) - 1.0 / mu; }, 1e-6, std::numbers::pi - 1e-9);

  const double lam_sym = mu_sym * mu_sym;
  const double lam_anti = mu_anti * mu_anti;
  suite.push_back(check("eigenvalue matches tan(mu/2) = -mu branch",
                        std::abs(spec.values[2] - lam_sym) <= 0.01 * lam_sym,
                        Fmt() << "computed " << spec.values[2] << " vs oracle " << lam_sym
                              << " (mu = " << mu_sym << ")"));
  suite.push_back(check("eigenvalue matches tan(mu/2) = 1/mu branch",
                        std::abs(spec.values[1] - lam_anti) <= 0.01 * lam_anti,
                        Fmt() << "computed " << spec.values[1] << " vs oracle " << lam_anti));

  // decay of the matched eigenmode under the forward flow
  EvolutionConfig cfg;
  cfg.horizon = 0.5;
  cfg.steps = 200;
  PotentialPair none;
  SourceData src{nullptr, nullptr, nullptr, nullptr, spec.modes[2]};
  const Trajectory y = solve_forward(op, none, src, cfg);
  const double rate =
      -std::log(norm(y.states.back(), mesh) / norm(spec.modes[2], mesh)) / cfg.horizon;
  suite.push_back(check("eigenmode decay rate", std::abs(rate - lam_sym) <= 0.02 * lam_sym,
                        Fmt() << "measured rate " << rate << " vs " << lam_sym));
  return suite;
}

Suite check_discrete_duality() {
  Suite suite;
  const DiskSetup s = default_disk();
  const PotentialPair pot = PotentialPair::constants(s.mesh, 0.3, -0.2);
  ControlMaps maps(s.op, pot, &s.omega, s.cfg);

  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    Eigen::MatrixXd v(s.op.size(), s.cfg.steps);
    for (int j = 0; j < v.size(); ++j) v.data()[j] = gauss(rng);
    v = maps.mask(std::move(v));
    const L2Pair phi_T = random_pair(s.mesh, rng);

    const double lhs = inner(maps.final_state(v), phi_T, s.mesh);
    const double rhs = maps.control_dot(v, maps.observe(phi_T));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }
  suite.push_back(check("adjoint pairing identity (20 probes)", worst <= 1e-10,
                        Fmt() << "worst relative defect = " << worst));

  // dense transpose verification on an 80-unknown interval mesh
  {
    const Mesh mesh = build_interval_mesh(79, 1.0);
    const DiscreteOperator op = assemble(mesh, 1.0, 0.0);
    const ControlRegion omega = control_mask(mesh, IntervalRegion{0.3, 0.6});
    EvolutionConfig cfg;
    cfg.horizon = 0.4;
    cfg.steps = 30;
    const PotentialPair cpot = PotentialPair::constants(mesh, 0.5, 0.1);
    ControlMaps small(op, cpot, &omega, cfg);

    const int n = op.size(), M = cfg.steps;
    Eigen::MatrixXd dense(n, n * M);
    Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(n, M);
    for (int col = 0; col < n * M; ++col) {
      const int node = col % n, step = col / n;
      if (omega.indicator[node] == 0.0) {
        dense.col(col).setZero();
        continue;
      }
      unit(node, step) = 1.0;
      dense.col(col) = op.to_coupled(small.final_state(unit));
      unit(node, step) = 0.0;
    }
    std::mt19937_64 rng2(14);
    double d_worst = 0.0;
    for (int probe = 0; probe < 5; ++probe) {
      const L2Pair phi = random_pair(mesh, rng2);
      const Eigen::VectorXd via_dense =
          dense.transpose() * op.mass.cwiseProduct(op.to_coupled(phi));
      const Eigen::MatrixXd obs = small.observe(phi);
      for (int col = 0; col < n * M; ++col) {
        const int node = col % n, step = col / n;
        const double direct = cfg.dt() * mesh.bulk_weights[node] * obs(node, step);
        d_worst = std::max(d_worst, std::abs(via_dense[col] - direct));
      }
    }
    suite.push_back(check("dense transpose agreement (80 unknowns)", d_worst <= 1e-12,
                          Fmt() << "max entry difference = " << d_worst));
  }
  return suite;
}

Suite check_observability() {
  Suite suite;
  const DiskSetup s = default_disk();
  PotentialPair none;
  ObservabilityParams params;
  params.seed = 21;

  // full observation: the quotient is maximized by constants at value 1
  ControlRegion full;
  full.indicator = Eigen::VectorXd::Ones(s.mesh.n_bulk());
  full.descriptor = DiskRegion{0, 0, 1.0};
  const ObservabilityReport full_rep =
      estimate_backward_observability(s.op, none, full, s.cfg, params);
  suite.push_back(check("full observation constant", std::abs(full_rep.constant - 1.0) <= 0.02,
                        Fmt() << "C = " << full_rep.constant << " in " << full_rep.iterations
                              << " iterations, shift " << full_rep.shift));

  const ObservabilityReport omega_rep =
      estimate_backward_observability(s.op, none, s.omega, s.cfg, params);
  suite.push_back(check("constant-datum lower bound", omega_rep.constant >= 12.0 * 0.95,
                        Fmt() << "C = " << omega_rep.constant << " vs certified 12"));

  // maximizer consistency: quotient recomputed from scratch
  {
    const Trajectory phi = solve_backward(s.op, none, nullptr, nullptr, omega_rep.maximizer, s.cfg);
    const double num = inner(phi.states.front(), phi.states.front(), s.mesh);
    const double den = observation_energy(s.op, none, s.omega, s.cfg, omega_rep.maximizer);
    const double q = num / den;
    suite.push_back(check("maximizer reproduces the constant",
                          std::abs(q - omega_rep.constant) <= 0.01 * omega_rep.constant,
                          Fmt() << "recomputed quotient " << q));
  }

  // Gramian symmetry and positive semidefiniteness
  {
    ControlMaps maps(s.op, none, &s.omega, s.cfg);
    std::mt19937_64 rng(22);
    double sym_worst = 0.0, psd_worst = 0.0;
    for (int p = 0; p < 5; ++p) {
      const L2Pair u = random_pair(s.mesh, rng);
      const L2Pair w = random_pair(s.mesh, rng);
      const double uw = inner(maps.gramian(u), w, s.mesh);
      const double wu = inner(u, maps.gramian(w), s.mesh);
      sym_worst = std::max(sym_worst, std::abs(uw - wu) / std::max(std::abs(uw), 1e-300));
      psd_worst = std::min(psd_worst, inner(maps.gramian(u), u, s.mesh));
    }
    suite.push_back(check("Gramian symmetric", sym_worst <= 1e-10,
                          Fmt() << "worst relative asymmetry = " << sym_worst));
    suite.push_back(
        check("Gramian positive semidefinite", psd_worst >= -1e-12, Fmt() << "min quadratic form = "
                                                                          << psd_worst));
  }

  // monotonicity in omega on a nested pair
  {
    const ControlRegion smaller = control_mask(s.mesh, DiskRegion{0.0, 0.0, 0.35});
    const ObservabilityReport small_rep =
        estimate_backward_observability(s.op, none, smaller, s.cfg, params);
    suite.push_back(check("monotone in the observation region",
                          omega_rep.constant <= small_rep.constant * 1.02,
                          Fmt() << "C(0.5) = " << omega_rep.constant
                                << " <= C(0.35) = " << small_rep.constant));
  }
  return suite;
}

Suite check_penalized_hum() {
  Suite suite;
  const DiskSetup s = default_disk();
  PotentialPair none;
  const L2Pair y0 = L2Pair::constant(s.mesh, 1.0, 1.0);
  const double y0_norm = norm(y0, s.mesh);

  double previous = 0.0;
  bool decreasing = true, identity_ok = true;
  double final_ratio = 0.0;
  std::string detail;
  const double cg_tol = 1e-8;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    HumParams params{eps, cg_tol, 500};
    const ControlResult res = penalized_hum(s.op, none, nullptr, nullptr, y0, s.omega, s.cfg, params);
    L2Pair identity = res.y.states.back();
    identity += eps * res.minimizer_phi_T;
    const double defect = norm(identity, s.mesh);
    const double phi_norm = norm(res.minimizer_phi_T, s.mesh);
    if (defect > 10 * cg_tol * phi_norm) identity_ok = false;
    if (eps != 1e-2 && res.terminal_norm >= previous) decreasing = false;
    previous = res.terminal_norm;
    final_ratio = res.terminal_norm / y0_norm;
    detail += (Fmt() << "eps " << eps << ": terminal " << res.terminal_norm << ", defect "
                     << defect << ", cg " << res.diag.iterations << "; ");
  }
  suite.push_back(check("terminal identity y(T) = -eps phi", identity_ok, detail));
  suite.push_back(check("terminal norm decreasing along the penalty path", decreasing, detail));
  suite.push_back(check("terminal ratio at eps = 1e-4",
                        final_ratio <= 1e-2 && final_ratio <= kHumTerminalRatioPin * 1.5,
                        Fmt() << "terminal_norm/|y0| = " << final_ratio << " (pin "
                              << kHumTerminalRatioPin << " x1.5)"));
  return suite;
}

namespace {

struct WeightedSetup {
  DiskSetup disk;
  CarlemanWeights cw;
  WeightedParams params;
};

WeightedSetup weighted_setup() {
  WeightedSetup w{default_disk(), {}, {}};
  const ControlRegion omega_prime = control_mask(w.disk.mesh, DiskRegion{0.0, 0.0, 0.25});
  w.cw = make_weights(w.disk.mesh, build_eta0(w.disk.mesh, omega_prime), 1.0, 1.0, 1.05, 1.0);
  w.params = WeightedParams{0.5, 1e-5, 1e-8, 500};
  return w;
}

std::function<Eigen::VectorXd(double)> decaying_bulk_source(const WeightedSetup& w, double scale) {
  if (scale == 0.0) return nullptr;
  const CarlemanWeights& cw = w.cw;
  return [&cw, scale](double t) {
    Eigen::VectorXd out(cw.eta0.size());
    for (int i = 0; i < out.size(); ++i)
      out[i] = scale * std::exp(-cw.s * cw.alpha_tilde(t, cw.eta0[i]));
    return out;
  };
}

std::function<Eigen::VectorXd(double)> decaying_surface_source(const WeightedSetup& w, double scale,
                                                               int n_boundary) {
  if (scale == 0.0) return nullptr;
  const CarlemanWeights& cw = w.cw;
  return [&cw, scale, n_boundary](double t) {
    return Eigen::VectorXd::Constant(n_boundary,
                                     scale * std::exp(-cw.s * cw.alpha_tilde(t, 0.0)))
        .eval();
  };
}

}  // namespace

Suite check_weighted_minimizer() {
  Suite suite;
  WeightedSetup w = weighted_setup();
  const Mesh& mesh = w.disk.mesh;
  const DiscreteOperator& op = w.disk.op;
  const EvolutionConfig& cfg = w.disk.cfg;
  PotentialPair none;

  // zero data: the unique minimizer of the nonnegative quadratic is zero
  {
    const ControlResult res = weighted_minimal_control(
        op, none, nullptr, nullptr, L2Pair::zero(mesh), w.disk.omega, w.cw, cfg, w.params);
    const bool ok = res.v.values.cwiseAbs().maxCoeff() == 0.0 && res.terminal_norm == 0.0 &&
                    res.control_energy == 0.0;
    suite.push_back(check("zero data gives the zero minimizer", ok,
                          Fmt() << "max |v| = " << res.v.values.cwiseAbs().maxCoeff()));
  }

  // minimality certificate on three problems
  {
    std::mt19937_64 rng(31);
    bool ok = true;
    std::string detail;
    for (int problem = 0; problem < 3; ++problem) {
      L2Pair y0 = problem == 0 ? L2Pair::constant(mesh, 1.0, 1.0) : smooth_random_pair(op, rng);
      auto f = problem == 2 ? decaying_bulk_source(w, 0.5) : nullptr;
      const ControlResult res =
          weighted_minimal_control(op, none, f, nullptr, y0, w.disk.omega, w.cw, cfg, w.params);
      const double q_min =
          weighted_objective(op, none, f, nullptr, y0, w.disk.omega, w.cw, cfg, w.params, res.v);
      const ControlResult hum =
          penalized_hum(op, none, f, nullptr, y0, w.disk.omega, cfg, HumParams{1e-4, 1e-8, 500});
      const double q_hum =
          weighted_objective(op, none, f, nullptr, y0, w.disk.omega, w.cw, cfg, w.params, hum.v);
      if (q_hum < q_min * (1.0 - 1e-6) - 1e-12) ok = false;
      detail += (Fmt() << "problem " << problem << ": Q_min " << q_min << " vs Q_hum " << q_hum
                       << "; ");
    }
    suite.push_back(check("HUM control certifies minimality", ok, detail));
  }

  // cost-versus-data bound on a five-point sweep
  {
    std::mt19937_64 rng(32);
    double worst = 0.0;
    const struct {
      double y0b, y0s, fs, gs;
    } sweep[] = {{1, 1, 0, 0}, {1, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0.5, 0.5, 0.25}};
    for (const auto& pt : sweep) {
      const L2Pair y0 = L2Pair::constant(mesh, pt.y0b, pt.y0s);
      auto f = decaying_bulk_source(w, pt.fs);
      auto g = decaying_surface_source(w, pt.gs, mesh.n_boundary());
      const ControlResult res =
          weighted_minimal_control(op, none, f, g, y0, w.disk.omega, w.cw, cfg, w.params);
      const double cost =
          std::sqrt(2.0 * res.weighted_state_energy) + std::sqrt(2.0 * res.control_energy);
      const double data = norm(y0, mesh) + weighted_data_norm(f, true, op, w.cw, cfg) +
                          weighted_data_norm(g, false, op, w.cw, cfg);
      worst = std::max(worst, cost / data);
    }
    suite.push_back(check("cost bounded by the weighted data norms",
                          worst <= kWeightedCostConstantPin * 1.5,
                          Fmt() << "measured constant " << worst << " (pin "
                                << kWeightedCostConstantPin << " x1.5)"));
  }
  return suite;
}

Suite check_carleman_diagnostic() {
  Suite suite;

  // eta0 invariants on the default disk
  {
    const DiskSetup s = default_disk();
    const ControlRegion omega_prime = control_mask(s.mesh, DiskRegion{0.0, 0.0, 0.25});
    const Eigen::VectorXd eta0 = build_eta0(s.mesh, omega_prime);

    bool positive = true;
    for (int i = 0; i < s.mesh.n_bulk(); ++i)
      if (!s.mesh.is_boundary_bulk_node(i) && eta0[i] <= 0.0) positive = false;
    const double boundary_max = s.mesh.trace(eta0).cwiseAbs().maxCoeff();

    const Eigen::VectorXd grad_sq = bulk_gradient_sq(s.mesh, eta0);
    double grad_min_outside = std::numeric_limits<double>::max();
    for (int i = 0; i < s.mesh.n_bulk(); ++i)
      if (omega_prime.indicator[i] == 0.0) grad_min_outside = std::min(grad_min_outside, grad_sq[i]);

    const Eigen::VectorXd dnu = normal_derivative(s.mesh, eta0);
    const double dnu_max = dnu.maxCoeff();

    const double tangential = surface_gradient_sq(s.mesh, s.mesh.trace(eta0)).maxCoeff();

    suite.push_back(check("eta0 positive inside and zero on the boundary",
                          positive && boundary_max == 0.0,
                          Fmt() << "max |eta0| on boundary = " << boundary_max));
    suite.push_back(check("gradient bounded below outside omega'",
                          grad_min_outside >= 0.2,
                          Fmt() << "min |grad eta0|^2 outside = " << grad_min_outside));
    suite.push_back(check("normal derivative strictly negative", dnu_max <= -1.0,
                          Fmt() << "max normal derivative = " << dnu_max << " (exact -2)"));
    suite.push_back(check("weights constant on the boundary", tangential == 0.0,
                          Fmt() << "max tangential gradient of eta0 = " << tangential));
  }

  // spot values at the documented parameter point
  {
    const Mesh unit = build_disk_mesh(8, 16, 1.0);
    const ControlRegion omega_prime = control_mask(unit, DiskRegion{0.0, 0.0, 0.25});
    const CarlemanWeights cw = make_weights(unit, build_eta0(unit, omega_prime), 1.0, 1.0, 2.0, 1.0);
    const double xi_ref = 4.0 * std::exp(2.0);
    const double alpha_ref = 4.0 * (std::exp(4.0) - std::exp(2.0));
    const double xi_val = cw.xi(0.5, 0.0);
    const double alpha_val = cw.alpha(0.5, 0.0);
    suite.push_back(check("weight spot values",
                          std::abs(xi_val - xi_ref) <= 1e-12 * xi_ref &&
                              std::abs(alpha_val - alpha_ref) <= 1e-12 * alpha_ref,
                          Fmt() << "xi = " << xi_val << " (4e^2 = " << xi_ref << "), alpha = "
                                << alpha_val << " (4(e^4 - e^2) = " << alpha_ref << ")"));
  }

  // ratio sweep over s at fixed lambda
  {
    DiskSetup s = default_disk(16, 64, 200, 2.5);
    const ControlRegion omega_prime = control_mask(s.mesh, DiskRegion{0.0, 0.0, 0.25});
    const Eigen::VectorXd eta0 = build_eta0(s.mesh, omega_prime);
    PotentialPair none;
    std::mt19937_64 rng(41);
    double max_ratio = 0.0;
    bool all_finite = true;
    for (double sv : {2.0, 4.0, 8.0}) {
      const CarlemanWeights cw = make_weights(s.mesh, eta0, sv, 2.0, 1.01, s.cfg.horizon);
      for (int sample = 0; sample < 10; ++sample) {
        const L2Pair phi_T = smooth_random_pair(s.op, rng);
        const Trajectory phi = solve_backward(s.op, none, nullptr, nullptr, phi_T, s.cfg);
        const CarlemanRatioReport rep = carleman_ratio(phi, s.op, none, cw, s.omega, s.cfg);
        if (!std::isfinite(rep.ratio) || rep.ratio <= 0.0) all_finite = false;
        max_ratio = std::max(max_ratio, rep.ratio);
      }
    }
    suite.push_back(check("ratio sweep bounded", all_finite && max_ratio <= kCarlemanKappaPin * 1.5,
                          Fmt() << "max ratio " << max_ratio << " (pin " << kCarlemanKappaPin
                                << " x1.5)"));
  }
  return suite;
}

Suite check_semilinear() {
  Suite suite;
  WeightedSetup w = weighted_setup();
  const Mesh& mesh = w.disk.mesh;
  const DiscreteOperator& op = w.disk.op;
  const EvolutionConfig& cfg = w.disk.cfg;

  // trace-compatible initial datum with |y0| = 0.1
  L2Pair y0 = L2Pair::zero(mesh);
  for (int i = 0; i < mesh.n_bulk(); ++i)
    y0.bulk[i] = 1.0 - 0.5 * mesh.bulk_nodes.row(i).squaredNorm();
  y0.surface = mesh.trace(y0.bulk);
  y0 *= 0.1 / norm(y0, mesh);
  const double y0_norm = norm(y0, mesh);

  Nonlinearity saturating;
  saturating.F = [](double x) { return x / (1.0 + x * x); };
  saturating.F_tilde = [](double x) { return 1.0 / (1.0 + x * x); };
  saturating.G = [](double) { return 0.0; };
  saturating.G_tilde = [](double) { return 0.0; };
  saturating.bound = 1.0;

  const HumParams hparams{1e-4, 1e-8, 500};
  const PicardParams pparams{50, 1e-3, 1.0, LinearSolverKind::weighted};

  // F = G = 0 reduces to the linear minimizer
  {
    const SemilinearResult res = picard_control(op, Nonlinearity::none(), nullptr, nullptr, y0,
                                                w.disk.omega, cfg, w.cw, w.params, hparams, pparams);
    const ControlResult lin = weighted_minimal_control(op, PotentialPair::zero(), nullptr, nullptr,
                                                       y0, w.disk.omega, w.cw, cfg, w.params);
    double diff = 0.0, base = 0.0;
    for (int m = 0; m <= cfg.steps; ++m) {
      L2Pair d = res.control.y.at(m) - lin.y.at(m);
      diff += inner(d, d, mesh);
      base += inner(lin.y.at(m), lin.y.at(m), mesh);
    }
    const double rel = std::sqrt(diff / std::max(base, 1e-300));
    suite.push_back(check("zero nonlinearity reduces to the linear control",
                          rel <= pparams.fp_tol && res.iterations <= 2,
                          Fmt() << "relative gap " << rel << " in " << res.iterations
                                << " iterations"));
  }

  // pinned bounded nonlinearity
  {
    const SemilinearResult res = picard_control(op, saturating, nullptr, nullptr, y0, w.disk.omega,
                                                cfg, w.cw, w.params, hparams, pparams);
    const double ratio = res.terminal_norm / y0_norm;
    suite.push_back(check("picard converges within the pinned budget",
                          res.converged && res.iterations <= kPicardIterationPin * 2,
                          Fmt() << res.iterations << " iterations (pin " << kPicardIterationPin
                                << " x2)"));
    suite.push_back(check("semilinear terminal ratio", ratio <= 1e-2,
                          Fmt() << "terminal_norm/|y0| = " << ratio));

    // re-linearization residual at the accepted iterate
    const PotentialPair frozen = [&] {
      Eigen::MatrixXd a(mesh.n_bulk(), cfg.steps + 1), b(mesh.n_boundary(), cfg.steps + 1);
      for (int m = 0; m <= cfg.steps; ++m) {
        for (int i = 0; i < mesh.n_bulk(); ++i)
          a(i, m) = saturating.F_tilde(res.control.y.at(m).bulk[i]);
        b.col(m).setZero();
      }
      return PotentialPair::tabulated(mesh, cfg.horizon, std::move(a), std::move(b), 1.0);
    }();
    const ControlResult relin =
        weighted_minimal_control(op, frozen, nullptr, nullptr, y0, w.disk.omega, w.cw, cfg, w.params);
    double diff = 0.0, base = 0.0;
    for (int m = 0; m <= cfg.steps; ++m) {
      L2Pair d = relin.y.at(m) - res.control.y.at(m);
      diff += inner(d, d, mesh);
      base += inner(res.control.y.at(m), res.control.y.at(m), mesh);
    }
    const double rel = std::sqrt(diff / std::max(base, 1e-300));
    suite.push_back(check("re-linearization residual", rel <= 2 * pparams.fp_tol,
                          Fmt() << "relative change " << rel));
  }
  return suite;
}

Suite check_reproducibility() {
  Suite suite;
  const std::string config_text = R"(
[geometry]
kind = "disk"
n_r = 8
n_theta = 24
radius = 1.0

[physics]
d = 1.0
delta = 1.0

[time]
T = 0.5
steps = 40

[control]
mode = "hum"
[control.omega]
radius = 0.5

[weights]
eps = 1e-3

[initial]
bulk = 1.0
surface = 1.0

[output]
directory = "unused"
)";
  namespace fs = std::filesystem;
  const ExperimentConfig cfg = parse_experiment_config(TomlDocument::parse(config_text));
  const fs::path base = fs::temp_directory_path() / "dynbc_repro";
  fs::remove_all(base);
  const std::string dir_a = (base / "a").string(), dir_b = (base / "b").string();
  run_experiment(cfg, dir_a, 7);
  run_experiment(cfg, dir_b, 7);

  bool identical = true;
  std::string detail;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(fs::path(dir_b) / entry.path().filename(), std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str() || sa.str().empty()) {
      identical = false;
      detail += entry.path().filename().string() + " differs; ";
    }
  }
  suite.push_back(check("byte-identical CSV outputs", identical,
                        detail.empty() ? "all CSV artifacts identical" : detail));
  fs::remove_all(base);
  return suite;
}

std::vector<std::string> verify_suite_names() {
  return {"operators", "evolution", "duality", "observability",
          "hum",       "weighted",  "semilinear", "carleman"};
}

Suite run_verify_suite(const std::string& suite) {
  if (suite == "operators") return check_operator_structure();
  if (suite == "evolution") {
    Suite s = check_conservation_stability();
    Suite spectral = check_spectral_regression();
    s.insert(s.end(), spectral.begin(), spectral.end());
    return s;
  }
  if (suite == "duality") return check_discrete_duality();
  if (suite == "observability") return check_observability();
  if (suite == "hum") return check_penalized_hum();
  if (suite == "weighted") return check_weighted_minimizer();
  if (suite == "semilinear") return check_semilinear();
  if (suite == "carleman") return check_carleman_diagnostic();
  std::string names;
  for (const auto& n : verify_suite_names()) names += n + " ";
  throw std::invalid_argument("unknown suite '" + suite + "'; valid suites: " + names);
}

std::vector<CheckResult> run_acceptance() {
  const std::vector<std::pair<std::string, Suite (*)()>> criteria = {
      {"operator-structure", check_operator_structure},
      {"conservation-stability", check_conservation_stability},
      {"spectral-regression", check_spectral_regression},
      {"discrete-duality", check_discrete_duality},
      {"observability", check_observability},
      {"penalized-hum", check_penalized_hum},
      {"weighted-minimizer", check_weighted_minimizer},
      {"carleman-diagnostic", check_carleman_diagnostic},
      {"semilinear", check_semilinear},
      {"reproducibility", check_reproducibility},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : criteria) {
    CheckResult agg{name, true, ""};
    try {
      for (const auto& sub : fn()) {
        if (!sub.passed) {
          agg.passed = false;
          agg.detail += sub.name + ": " + sub.detail + "; ";
        }
      }
      if (agg.passed) agg.detail = "all checks passed";
    } catch (const std::exception& e) {
      agg.passed = false;
      agg.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(agg));
  }
  return out;
}

}  // namespace dynbc

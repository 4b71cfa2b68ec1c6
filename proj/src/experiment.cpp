#include "dynbc/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

namespace dynbc {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::function<Eigen::VectorXd(double)> constant_source(int size, double value) {
  if (value == 0.0) return nullptr;
  return [size, value](double) { return Eigen::VectorXd::Constant(size, value).eval(); };
}

double mass_functional(const L2Pair& y, const Mesh& mesh) {
  return y.bulk.dot(mesh.bulk_weights) + y.surface.dot(mesh.boundary_weights);
}

L2Pair smooth_random_pair(const DiscreteOperator& op, std::mt19937_64& rng, int smoothing_steps,
                          const EvolutionConfig& base) {
  std::normal_distribution<double> gauss;
  L2Pair z = L2Pair::zero(op.mesh);
  for (int i = 0; i < op.mesh.n_bulk(); ++i) z.bulk[i] = gauss(rng);
  for (int k = 0; k < op.mesh.n_boundary(); ++k) z.surface[k] = gauss(rng);
  // a few implicit steps smooth the sample into the trace-coupled class
  EvolutionConfig cfg = base;
  cfg.steps = std::max(2, smoothing_steps);
  cfg.horizon = 1e-3 * base.horizon;
  PotentialPair none;
  SourceData src{nullptr, nullptr, nullptr, nullptr, z};
  Trajectory tr = solve_forward(op, none, src, cfg);
  L2Pair out = tr.states.back();
  const double s = norm(out, op.mesh);
  if (s > 0) out *= 1.0 / s;
  return out;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
}

int thread_budget() {
  if (const char* env = std::getenv("DYNBC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Deterministic parallel map: tasks are indexed, results ordered.
template <class Fn>
void parallel_for(int count, int threads, const Fn& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& output_dir,
                                 std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();
  fs::create_directories(output_dir);

  const Mesh mesh = cfg.build_mesh();
  const DiscreteOperator op = assemble(mesh, cfg.d, cfg.delta);
  const PotentialPair pot = cfg.build_potentials(mesh);
  const EvolutionConfig& time = cfg.time;

  ExperimentOutcome outcome;
  json manifest;
  manifest["mode"] = to_string(cfg.mode);
  manifest["seed"] = seed;
  manifest["config"] = cfg.raw_text;
  manifest["version"] = "0.1.0";
  manifest["geometry"] = {{"kind", mesh.kind == MeshKind::disk ? "disk" : "interval"},
                          {"n_bulk", mesh.n_bulk()},
                          {"n_boundary", mesh.n_boundary()}};

  auto emit = [&](const std::string& name) {
    outcome.artifacts.push_back(name);
    return join(output_dir, name);
  };

  const L2Pair y0 = L2Pair::constant(mesh, cfg.y0.bulk, cfg.y0.surface);
  const auto f_src = constant_source(mesh.n_bulk(), cfg.sources.bulk);
  const auto g_src = constant_source(mesh.n_boundary(), cfg.sources.surface);

  ControlRegion region;
  if (cfg.has_omega) region = control_mask(mesh, cfg.omega);

  if (cfg.dump_mesh) mesh.dump_csv(emit("mesh.csv"));
  if (cfg.dump_operator) dump_operator_triplets(op, emit("stiffness.txt"), emit("mass.txt"));

  switch (cfg.mode) {
    case RunMode::simulate: {
      SourceData src{f_src, g_src, nullptr, nullptr, y0};
      const Trajectory y = solve_forward(op, pot, src, time);
      if (cfg.write_csv) write_trajectory_csv(y, emit("trajectory.csv"));
      if (cfg.write_binary) write_trajectory_binary(y, emit("trajectory.bin"));

      if (pot.is_zero() && !f_src && !g_src) {
        // conserved exactly by the scheme structure; record the solver noise
        double drift = 0.0;
        const double m0 = mass_functional(y.states.front(), mesh);
        for (const auto& state : y.states)
          drift = std::max(drift, std::abs(mass_functional(state, mesh) - m0));
        manifest["mass_drift"] = drift / std::max(std::abs(m0), 1e-300);
      }
      manifest["terminal_norm"] = norm(y.states.back(), mesh);
      outcome.headline = "simulate: terminal norm " + std::to_string(norm(y.states.back(), mesh));
      break;
    }

    case RunMode::hum: {
      // single penalty by default; a penalty path reports one entry per
      // epsilon and keeps the artifacts of the last (smallest) one
      std::vector<double> path = cfg.epsilon_path.empty() ? std::vector<double>{cfg.eps}
                                                          : cfg.epsilon_path;
      json entries = json::array();
      for (double eps : path) {
        HumParams params{eps, cfg.cg_tol, cfg.cg_max_iter};
        const ControlResult res = penalized_hum(op, pot, f_src, g_src, y0, region, time, params);
        L2Pair identity = res.y.states.back();
        identity += eps * res.minimizer_phi_T;
        const double identity_residual = norm(identity, mesh);
        entries.push_back({{"epsilon", eps},
                           {"terminal_norm", res.terminal_norm},
                           {"identity_residual", identity_residual},
                           {"control_energy", res.control_energy},
                           {"cg_iterations", res.diag.iterations},
                           {"cg_residual", res.diag.residual}});
        if (eps == path.back() && cfg.write_csv) {
          res.v.write_csv(emit("control.csv"));
          write_trajectory_csv(res.y, emit("state.csv"));
          write_pair_csv(res.minimizer_phi_T, emit("phi_T.csv"));
        }
        manifest["terminal_norm"] = res.terminal_norm;
        manifest["identity_residual"] = identity_residual;
        manifest["cg_iterations"] = res.diag.iterations;
        outcome.headline = "hum: terminal norm " + std::to_string(res.terminal_norm);
      }
      write_json(path.size() == 1 ? entries[0] : json{{"path", entries}}, emit("result.json"));
      break;
    }

    case RunMode::weighted: {
      const ControlRegion omega_prime = control_mask(mesh, shrink_region(cfg.omega));
      const CarlemanWeights cw =
          make_weights(mesh, build_eta0(mesh, omega_prime), cfg.s, cfg.lambda, cfg.m, time.horizon);
      WeightedParams params{cfg.eps_rho, cfg.mu, cfg.cg_tol, cfg.cg_max_iter};
      const ControlResult res =
          weighted_minimal_control(op, pot, f_src, g_src, y0, region, cw, time, params);
      if (cfg.write_csv) {
        res.v.write_csv(emit("control.csv"));
        write_trajectory_csv(res.y, emit("state.csv"));
      }
      json r = {{"terminal_norm", res.terminal_norm},
                {"control_energy", res.control_energy},
                {"weighted_state_energy", res.weighted_state_energy},
                {"terminal_penalty", res.terminal_penalty},
                {"cg_iterations", res.diag.iterations},
                {"cg_residual", res.diag.residual}};
      write_json(r, emit("result.json"));
      manifest["terminal_norm"] = res.terminal_norm;
      manifest["objective"] =
          res.control_energy + res.weighted_state_energy + res.terminal_penalty;
      outcome.headline = "weighted: terminal norm " + std::to_string(res.terminal_norm);
      break;
    }

    case RunMode::semilinear: {
      const ControlRegion omega_prime = control_mask(mesh, shrink_region(cfg.omega));
      const CarlemanWeights cw =
          make_weights(mesh, build_eta0(mesh, omega_prime), cfg.s, cfg.lambda, cfg.m, time.horizon);
      WeightedParams wparams{cfg.eps_rho, cfg.mu, cfg.cg_tol, cfg.cg_max_iter};
      HumParams hparams{cfg.eps, cfg.cg_tol, cfg.cg_max_iter};
      PicardParams pparams{cfg.picard_max_iter, cfg.picard_fp_tol, 1.0,
                           cfg.inner_solver == "hum" ? LinearSolverKind::hum
                                                     : LinearSolverKind::weighted};
      const Nonlinearity nl = cfg.build_nonlinearity();
      const SemilinearResult res =
          picard_control(op, nl, f_src, g_src, y0, region, time, cw, wparams, hparams, pparams);
      if (cfg.write_csv) {
        res.control.v.write_csv(emit("control.csv"));
        write_trajectory_csv(res.state, emit("state.csv"));
        write_history_csv(res.history, emit("history.csv"));
      }
      json r = {{"terminal_norm", res.terminal_norm},
                {"iterations", res.iterations},
                {"converged", res.converged}};
      write_json(r, emit("result.json"));
      manifest["terminal_norm"] = res.terminal_norm;
      manifest["iterations"] = res.iterations;
      outcome.headline = "semilinear: converged in " + std::to_string(res.iterations) +
                         " iterations, terminal norm " + std::to_string(res.terminal_norm);
      break;
    }

    case RunMode::observability: {
      if (!cfg.has_omega) {
        region.indicator = Eigen::VectorXd::Ones(mesh.n_bulk());  // full observation
        region.descriptor = DiskRegion{0, 0, cfg.radius};
      }
      // inexact inverse iteration: inner solves stay much looser than the
      // control-grade CG tolerances
      ObservabilityParams params;
      params.cg_tol = std::max(cfg.cg_tol, 3e-4);
      params.cg_max_iter = std::max(cfg.cg_max_iter, 2000);
      params.seed = seed;
      const ObservabilityReport rep =
          estimate_backward_observability(op, pot, region, time, params);

      // forward final-state quotients on a few seeded samples
      std::mt19937_64 rng(seed);
      std::vector<L2Pair> samples;
      samples.push_back(L2Pair::constant(mesh, 1.0, 1.0));
      for (int k = 0; k < 2; ++k) samples.push_back(smooth_random_pair(op, rng, 4, time));
      const ForwardFinalStateReport fwd =
          check_forward_final_state(op, pot, region, time, samples, rep.constant);

      json r = {{"constant", rep.constant},
                {"iterations", rep.iterations},
                {"residual", rep.residual},
                {"shift", rep.shift},
                {"maximizer_quotient", rep.maximizer_quotient},
                {"forward_quotients", fwd.quotients},
                {"forward_within_bound", fwd.within_backward_bound}};
      write_json(r, emit("report.json"));
      manifest["constant"] = rep.constant;
      manifest["shift"] = rep.shift;
      outcome.headline = "observability: C_obs " + std::to_string(rep.constant);
      break;
    }

    case RunMode::carleman_sweep: {
      const ControlRegion omega = region;
      const ControlRegion omega_prime = control_mask(mesh, shrink_region(cfg.omega));
      const Eigen::VectorXd eta0 = build_eta0(mesh, omega_prime);
      std::vector<double> svals = cfg.s_values.empty() ? std::vector<double>{cfg.s} : cfg.s_values;

      // draw all samples first so the parallel sweep stays deterministic
      std::mt19937_64 rng(seed);
      std::vector<L2Pair> data;
      for (int sample = 0; sample < cfg.sweep_samples; ++sample)
        data.push_back(smooth_random_pair(op, rng, 4, time));

      const int total = static_cast<int>(svals.size()) * cfg.sweep_samples;
      std::vector<CarlemanRatioReport> reports(static_cast<size_t>(total));
      parallel_for(total, thread_budget(), [&](int idx) {
        const double sv = svals[static_cast<size_t>(idx / cfg.sweep_samples)];
        const L2Pair& phi_T = data[static_cast<size_t>(idx % cfg.sweep_samples)];
        const CarlemanWeights cw = make_weights(mesh, eta0, sv, cfg.lambda, cfg.m, time.horizon);
        const Trajectory phi = solve_backward(op, pot, nullptr, nullptr, phi_T, time);
        reports[static_cast<size_t>(idx)] = carleman_ratio(phi, op, pot, cw, omega, time);
      });

      std::FILE* fcsv = std::fopen(join(output_dir, "sweep.csv").c_str(), "w");
      if (!fcsv) throw std::runtime_error("cannot open sweep.csv");
      outcome.artifacts.push_back("sweep.csv");
      std::fprintf(fcsv,
                   "s,lambda,sample,lhs_dt_lap_bulk,lhs_dt_lap_boundary,lhs_grad_bulk,"
                   "lhs_grad_boundary,lhs_zero_bulk,lhs_zero_boundary,lhs_normal,"
                   "rhs_region,rhs_bulk_residual,rhs_boundary_residual,ratio\n");
      double max_ratio = 0.0;
      for (int idx = 0; idx < total; ++idx) {
        const CarlemanRatioReport& rep = reports[static_cast<size_t>(idx)];
        std::fprintf(fcsv, "%.17g,%.17g,%d", svals[static_cast<size_t>(idx / cfg.sweep_samples)],
                     cfg.lambda, idx % cfg.sweep_samples);
        for (double t : rep.lhs_terms) std::fprintf(fcsv, ",%.17g", t);
        for (double t : rep.rhs_terms) std::fprintf(fcsv, ",%.17g", t);
        std::fprintf(fcsv, ",%.17g\n", rep.ratio);
        max_ratio = std::max(max_ratio, rep.ratio);
      }
      std::fclose(fcsv);
      manifest["max_ratio"] = max_ratio;
      outcome.headline = "carleman-sweep: max ratio " + std::to_string(max_ratio);
      break;
    }
  }

  const auto t_end = std::chrono::steady_clock::now();
  manifest["wall_time_s"] = std::chrono::duration<double>(t_end - t_start).count();
  manifest["artifacts"] = outcome.artifacts;
  outcome.manifest_path = join(output_dir, "manifest.json");
  write_json(manifest, outcome.manifest_path);
  return outcome;
}

}  // namespace dynbc

#pragma once

#include "dynbc/control.hpp"
#include "dynbc/observability.hpp"
#include "dynbc/semilinear.hpp"
#include "dynbc/toml.hpp"

namespace dynbc {

enum class RunMode { simulate, hum, weighted, semilinear, observability, carleman_sweep };

RunMode run_mode_from_string(const std::string& name);
std::string to_string(RunMode mode);

/// Piecewise-constant-in-time, nodal-in-space potential specifier.
struct PotentialSpec {
  enum class Kind { zero, constant, table } kind = Kind::zero;
  double value = 0.0;
  std::vector<double> breakpoints;          // table: interval starts
  std::vector<std::vector<double>> values;  // table: nodal values per interval
};

struct ConstantPairSpec {
  double bulk = 0.0;
  double surface = 0.0;
};

/// A fully parsed experiment description.
struct ExperimentConfig {
  // [geometry]
  MeshKind geometry_kind = MeshKind::disk;
  int n_r = 16, n_theta = 64;
  double radius = 1.0;
  int n = 200;
  double length = 1.0;

  // [physics]
  double d = 1.0, delta = 1.0;
  PotentialSpec a, b;

  // [time]
  EvolutionConfig time;

  // [control]
  RunMode mode = RunMode::simulate;
  bool has_omega = false;
  RegionSpec omega;
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
  int picard_max_iter = 50;
  double picard_fp_tol = 1e-3;
  std::string inner_solver = "weighted";  // semilinear sub-solver
  std::vector<double> epsilon_path;       // hum penalty sweep (optional)

  // [weights]
  double s = 2.0, lambda = 2.0, m = 2.0;
  double eps = 1e-4;      // HUM penalty
  double eps_rho = 1e-2;  // rho regularizer
  double mu = 1e-6;       // terminal penalty of the weighted minimizer
  std::vector<double> s_values;  // carleman sweep
  int sweep_samples = 10;

  // [semilinear]
  std::string nonlinearity = "saturating";
  double nonlinearity_scale = 1.0;

  // [initial], [sources]
  ConstantPairSpec y0;
  ConstantPairSpec sources;  // constant f (bulk), g (surface)

  // [output]
  std::string output_dir = "out";
  bool write_csv = true;
  bool write_binary = false;
  bool dump_mesh = false;
  bool dump_operator = false;

  std::uint64_t seed = 1;
  std::string raw_text;  // config echo for the manifest

  Mesh build_mesh() const;
  PotentialPair build_potentials(const Mesh& mesh) const;
  Nonlinearity build_nonlinearity() const;
};

ExperimentConfig parse_experiment_config(const TomlDocument& doc);
ExperimentConfig parse_experiment_file(const std::string& path);

}  // namespace dynbc

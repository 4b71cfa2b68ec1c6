#include "dynbc/config.hpp"

#include <algorithm>
#include <cmath>

namespace dynbc {

RunMode run_mode_from_string(const std::string& name) {
  if (name == "simulate") return RunMode::simulate;
  if (name == "hum") return RunMode::hum;
  if (name == "weighted") return RunMode::weighted;
  if (name == "semilinear") return RunMode::semilinear;
  if (name == "observability") return RunMode::observability;
  if (name == "carleman-sweep") return RunMode::carleman_sweep;
  throw ConfigError("control.mode",
                    "unknown mode '" + name +
                        "' (expected simulate | hum | weighted | semilinear | observability | "
                        "carleman-sweep)");
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::simulate: return "simulate";
    case RunMode::hum: return "hum";
    case RunMode::weighted: return "weighted";
    case RunMode::semilinear: return "semilinear";
    case RunMode::observability: return "observability";
    case RunMode::carleman_sweep: return "carleman-sweep";
  }
  return "?";
}

namespace {

PotentialSpec parse_potential_spec(const TomlDocument& doc, const std::string& prefix) {
  PotentialSpec spec;
  if (!doc.has_block(prefix)) return spec;
  const std::string type = doc.get_string_or(prefix + ".type", "zero");
  if (type == "zero") {
    spec.kind = PotentialSpec::Kind::zero;
  } else if (type == "constant") {
    spec.kind = PotentialSpec::Kind::constant;
    spec.value = doc.get_number(prefix + ".value");
  } else if (type == "table") {
    spec.kind = PotentialSpec::Kind::table;
    spec.breakpoints = doc.get_number_array(prefix + ".times");
    if (spec.breakpoints.empty()) throw ConfigError(prefix + ".times", "empty breakpoint list");
    if (!std::is_sorted(spec.breakpoints.begin(), spec.breakpoints.end()))
      throw ConfigError(prefix + ".times", "breakpoints must be increasing");
    // one entry per interval: either a scalar (spatially constant) or an
    // array of nodal values
    spec.values.clear();
    for (const TomlValue& entry : doc.get_array(prefix + ".values").array) {
      if (entry.kind == TomlValue::Kind::number) {
        spec.values.push_back({entry.number});
      } else if (entry.kind == TomlValue::Kind::array) {
        std::vector<double> nodal;
        for (const TomlValue& x : entry.array) {
          if (x.kind != TomlValue::Kind::number)
            throw ConfigError(prefix + ".values", "expected numeric nodal values");
          nodal.push_back(x.number);
        }
        if (nodal.empty()) throw ConfigError(prefix + ".values", "empty nodal value list");
        spec.values.push_back(std::move(nodal));
      } else {
        throw ConfigError(prefix + ".values", "expected a number or an array per interval");
      }
    }
    if (spec.values.size() != spec.breakpoints.size())
      throw ConfigError(prefix + ".values", "need one entry per breakpoint");
  } else {
    throw ConfigError(prefix + ".type", "expected zero | constant | table");
  }
  return spec;
}

RegionSpec parse_region(const TomlDocument& doc, const std::string& prefix, MeshKind kind) {
  if (kind == MeshKind::disk) {
    DiskRegion r;
    r.cx = doc.get_number_or(prefix + ".cx", 0.0);
    r.cy = doc.get_number_or(prefix + ".cy", 0.0);
    r.radius = doc.get_number(prefix + ".radius");
    return r;
  }
  IntervalRegion r;
  r.left = doc.get_number(prefix + ".left");
  r.right = doc.get_number(prefix + ".right");
  return r;
}

Eigen::VectorXd piecewise_values(const PotentialSpec& spec, double t, int count,
                                 const char* field) {
  size_t idx = 0;
  for (size_t i = 0; i < spec.breakpoints.size(); ++i)
    if (t >= spec.breakpoints[i]) idx = i;
  const std::vector<double>& vals = spec.values[idx];
  if (vals.size() == 1) return Eigen::VectorXd::Constant(count, vals[0]);
  if (static_cast<int>(vals.size()) != count)
    throw ConfigError(field, "nodal value count does not match the mesh");
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), count);
}

}  // namespace

Mesh ExperimentConfig::build_mesh() const {
  if (geometry_kind == MeshKind::disk) return build_disk_mesh(n_r, n_theta, radius);
  return build_interval_mesh(n, length);
}

PotentialPair ExperimentConfig::build_potentials(const Mesh& mesh) const {
  PotentialPair pot;
  double bound = 0.0;
  const int nb = mesh.n_bulk(), ns = mesh.n_boundary();
  if (a.kind == PotentialSpec::Kind::constant) {
    pot.a = [nb, v = a.value](double) { return Eigen::VectorXd::Constant(nb, v).eval(); };
    bound = std::max(bound, std::abs(a.value));
  } else if (a.kind == PotentialSpec::Kind::table) {
    pot.a = [nb, spec = a](double t) { return piecewise_values(spec, t, nb, "physics.a.values"); };
    pot.time_dependent = true;
    for (const auto& vs : a.values)
      for (double v : vs) bound = std::max(bound, std::abs(v));
  }
  if (b.kind == PotentialSpec::Kind::constant) {
    pot.b = [ns, v = b.value](double) { return Eigen::VectorXd::Constant(ns, v).eval(); };
    bound = std::max(bound, std::abs(b.value));
  } else if (b.kind == PotentialSpec::Kind::table) {
    pot.b = [ns, spec = b](double t) { return piecewise_values(spec, t, ns, "physics.b.values"); };
    pot.time_dependent = true;
    for (const auto& vs : b.values)
      for (double v : vs) bound = std::max(bound, std::abs(v));
  }
  pot.bound = bound;
  return pot;
}

Nonlinearity ExperimentConfig::build_nonlinearity() const {
  const double c = nonlinearity_scale;
  Nonlinearity nl;
  if (nonlinearity == "none") return Nonlinearity::none();
  if (nonlinearity == "saturating") {
    nl.F = [c](double x) { return c * x / (1.0 + x * x); };
    nl.F_tilde = [c](double x) { return c / (1.0 + x * x); };
    nl.G = [](double) { return 0.0; };
    nl.G_tilde = [](double) { return 0.0; };
    nl.bound = std::abs(c);
    return nl;
  }
  if (nonlinearity == "sine") {
    nl.F = [c](double x) { return c * std::sin(x); };
    nl.F_tilde = [c](double x) { return x == 0.0 ? c : c * std::sin(x) / x; };
    nl.G = [c](double x) { return c * std::sin(x); };
    nl.G_tilde = [c](double x) { return x == 0.0 ? c : c * std::sin(x) / x; };
    nl.bound = std::abs(c);
    return nl;
  }
  throw ConfigError("semilinear.nonlinearity", "expected none | saturating | sine");
}

ExperimentConfig parse_experiment_config(const TomlDocument& doc) {
  ExperimentConfig cfg;
  cfg.raw_text = doc.text();

  if (!doc.has_block("geometry")) throw ConfigError("geometry", "missing block");
  const std::string kind = doc.get_string("geometry.kind");
  if (kind == "disk") {
    cfg.geometry_kind = MeshKind::disk;
    cfg.n_r = static_cast<int>(doc.get_integer_or("geometry.n_r", 16));
    cfg.n_theta = static_cast<int>(doc.get_integer_or("geometry.n_theta", 64));
    cfg.radius = doc.get_number_or("geometry.radius", 1.0);
  } else if (kind == "interval") {
    cfg.geometry_kind = MeshKind::interval;
    cfg.n = static_cast<int>(doc.get_integer_or("geometry.n", 200));
    cfg.length = doc.get_number_or("geometry.length", 1.0);
  } else {
    throw ConfigError("geometry.kind", "expected disk | interval");
  }

  if (!doc.has_block("physics")) throw ConfigError("physics", "missing block");
  cfg.d = doc.get_number_or("physics.d", 1.0);
  cfg.delta = doc.get_number_or("physics.delta", 1.0);
  cfg.a = parse_potential_spec(doc, "physics.a");
  cfg.b = parse_potential_spec(doc, "physics.b");

  if (!doc.has_block("time")) throw ConfigError("time", "missing block");
  cfg.time.horizon = doc.get_number("time.T");
  cfg.time.steps = static_cast<int>(doc.get_integer("time.steps"));
  cfg.time.theta = doc.get_number_or("time.theta", 0.5);
  cfg.time.solver_tol = doc.get_number_or("time.solver_tol", 1e-10);
  cfg.time.validate();

  if (!doc.has_block("control") && !doc.contains("control.mode"))
    throw ConfigError("control", "missing block");
  cfg.mode = run_mode_from_string(doc.get_string("control.mode"));
  if (doc.has_block("control.omega")) {
    cfg.omega = parse_region(doc, "control.omega", cfg.geometry_kind);
    cfg.has_omega = true;
  }
  cfg.cg_tol = doc.get_number_or("control.cg_tol", 1e-8);
  cfg.cg_max_iter = static_cast<int>(doc.get_integer_or("control.cg_max_iter", 500));
  cfg.picard_max_iter = static_cast<int>(doc.get_integer_or("control.max_iter", 50));
  cfg.picard_fp_tol = doc.get_number_or("control.fp_tol", 1e-3);
  cfg.inner_solver = doc.get_string_or("control.inner", "weighted");
  if (doc.contains("control.epsilon_path"))
    cfg.epsilon_path = doc.get_number_array("control.epsilon_path");

  const bool needs_omega = cfg.mode != RunMode::simulate;
  if (needs_omega && !cfg.has_omega && cfg.mode != RunMode::observability)
    throw ConfigError("control.omega", "missing block for mode " + to_string(cfg.mode));

  cfg.s = doc.get_number_or("weights.s", 2.0);
  cfg.lambda = doc.get_number_or("weights.lambda", 2.0);
  cfg.m = doc.get_number_or("weights.m", 2.0);
  cfg.eps = doc.get_number_or("weights.eps", 1e-4);
  cfg.eps_rho = doc.get_number_or("weights.eps_rho", 1e-2);
  cfg.mu = doc.get_number_or("weights.mu", 1e-6);
  if (doc.contains("weights.s_values")) cfg.s_values = doc.get_number_array("weights.s_values");
  cfg.sweep_samples = static_cast<int>(doc.get_integer_or("weights.sweep_samples", 10));
  const bool needs_weights =
      cfg.mode == RunMode::weighted || cfg.mode == RunMode::carleman_sweep ||
      (cfg.mode == RunMode::semilinear && cfg.inner_solver == "weighted");
  if (needs_weights && !doc.has_block("weights"))
    throw ConfigError("weights", "missing block for mode " + to_string(cfg.mode));

  cfg.nonlinearity = doc.get_string_or("semilinear.nonlinearity", "saturating");
  cfg.nonlinearity_scale = doc.get_number_or("semilinear.scale", 1.0);

  cfg.y0.bulk = doc.get_number_or("initial.bulk", 0.0);
  cfg.y0.surface = doc.get_number_or("initial.surface", 0.0);
  cfg.sources.bulk = doc.get_number_or("sources.f", 0.0);
  cfg.sources.surface = doc.get_number_or("sources.g", 0.0);

  cfg.output_dir = doc.get_string_or("output.directory", "out");
  cfg.write_csv = doc.get_bool_or("output.csv", true);
  cfg.write_binary = doc.get_bool_or("output.binary", false);
  cfg.dump_mesh = doc.get_bool_or("output.mesh", false);
  cfg.dump_operator = doc.get_bool_or("output.operator", false);

  cfg.seed = static_cast<std::uint64_t>(doc.get_integer_or("seed", 1));
  return cfg;
}

ExperimentConfig parse_experiment_file(const std::string& path) {
  return parse_experiment_config(TomlDocument::parse_file(path));
}

}  // namespace dynbc

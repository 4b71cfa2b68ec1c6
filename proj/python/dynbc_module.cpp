#include "dynbc/config.hpp"
#include "dynbc/experiment.hpp"
#include "dynbc/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dynbc;

namespace {

RegionSpec region_from_args(const Mesh& mesh, double cx, double cy, double radius, double left,
                            double right) {
  if (mesh.kind == MeshKind::disk) return DiskRegion{cx, cy, radius};
  return IntervalRegion{left, right};
}

std::function<Eigen::VectorXd(double)> wrap_source(const py::object& fn) {
  if (fn.is_none()) return nullptr;
  auto callable = fn.cast<std::function<Eigen::VectorXd(double)>>();
  return callable;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "heat equations with dynamic boundary conditions: solvers and null controls";

  py::enum_<MeshKind>(m, "MeshKind")
      .value("disk", MeshKind::disk)
      .value("interval", MeshKind::interval);

  py::class_<Mesh>(m, "Mesh")
      .def_readonly("kind", &Mesh::kind)
      .def_readonly("bulk_nodes", &Mesh::bulk_nodes)
      .def_readonly("bulk_weights", &Mesh::bulk_weights)
      .def_readonly("boundary_nodes", &Mesh::boundary_nodes)
      .def_readonly("boundary_weights", &Mesh::boundary_weights)
      .def_property_readonly("n_bulk", &Mesh::n_bulk)
      .def_property_readonly("n_boundary", &Mesh::n_boundary)
      .def("trace", &Mesh::trace)
      .def("dump_csv", &Mesh::dump_csv);

  m.def("build_disk_mesh", &build_disk_mesh, py::arg("n_r"), py::arg("n_theta"),
        py::arg("radius") = 1.0);
  m.def("build_interval_mesh", &build_interval_mesh, py::arg("n"), py::arg("length") = 1.0);

  py::class_<ControlRegion>(m, "ControlRegion")
      .def_readonly("indicator", &ControlRegion::indicator)
      .def("measure", &ControlRegion::measure);

  m.def(
      "control_mask",
      [](const Mesh& mesh, double cx, double cy, double radius, double left, double right) {
        return control_mask(mesh, region_from_args(mesh, cx, cy, radius, left, right));
      },
      py::arg("mesh"), py::arg("cx") = 0.0, py::arg("cy") = 0.0, py::arg("radius") = 0.0,
      py::arg("left") = 0.0, py::arg("right") = 0.0);

  py::class_<L2Pair>(m, "L2Pair")
      .def(py::init([](Eigen::VectorXd bulk, Eigen::VectorXd surface) {
             return L2Pair{std::move(bulk), std::move(surface)};
           }),
           py::arg("bulk"), py::arg("surface"))
      .def_readwrite("bulk", &L2Pair::bulk)
      .def_readwrite("surface", &L2Pair::surface)
      .def_static("constant", &L2Pair::constant, py::arg("mesh"), py::arg("bulk"),
                  py::arg("surface"));

  m.def("inner", &inner, py::arg("a"), py::arg("b"), py::arg("mesh"));
  m.def("norm", &norm, py::arg("a"), py::arg("mesh"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("horizon", &Trajectory::horizon)
      .def_property_readonly("steps", &Trajectory::steps)
      .def("time", &Trajectory::time)
      .def("state", [](const Trajectory& tr, int m) { return tr.at(m); })
      .def("write_csv", &write_trajectory_csv)
      .def("write_binary", &write_trajectory_binary);

  py::class_<PotentialPair>(m, "PotentialPair")
      .def_static("zero", &PotentialPair::zero)
      .def_static("constants", &PotentialPair::constants, py::arg("mesh"), py::arg("a"),
                  py::arg("b"));

  py::class_<DiscreteOperator>(m, "DiscreteOperator")
      .def_readonly("mesh", &DiscreteOperator::mesh)
      .def_readonly("mass", &DiscreteOperator::mass)
      .def_property_readonly(
          "stiffness", [](const DiscreteOperator& op) { return Eigen::MatrixXd(op.stiffness); })
      .def("to_coupled", &DiscreteOperator::to_coupled)
      .def("from_coupled", &DiscreteOperator::from_coupled);

  m.def("assemble", &assemble, py::arg("mesh"), py::arg("d") = 1.0, py::arg("delta") = 1.0);
  m.def("apply_operator", &apply_operator, py::arg("op"), py::arg("pot"), py::arg("t"),
        py::arg("y"));
  m.def(
      "spectrum_smallest",
      [](const DiscreteOperator& op, int k) {
        const SpectrumResult r = spectrum_smallest(op, k);
        return py::make_tuple(r.values, r.modes);
      },
      py::arg("op"), py::arg("k"));

  py::class_<EvolutionConfig>(m, "EvolutionConfig")
      .def(py::init([](double T, int steps, double theta, double solver_tol) {
             EvolutionConfig c{T, steps, theta, solver_tol};
             c.validate();
             return c;
           }),
           py::arg("T") = 1.0, py::arg("steps") = 200, py::arg("theta") = 0.5,
           py::arg("solver_tol") = 1e-10)
      .def_readwrite("T", &EvolutionConfig::horizon)
      .def_readwrite("steps", &EvolutionConfig::steps)
      .def_readwrite("theta", &EvolutionConfig::theta);

  m.def(
      "solve_forward",
      [](const DiscreteOperator& op, const PotentialPair& pot, const L2Pair& y0,
         const EvolutionConfig& cfg, const py::object& f, const py::object& g) {
        SourceData src{wrap_source(f), wrap_source(g), nullptr, nullptr, y0};
        return solve_forward(op, pot, src, cfg);
      },
      py::arg("op"), py::arg("pot"), py::arg("y0"), py::arg("cfg"), py::arg("f") = py::none(),
      py::arg("g") = py::none());

  m.def(
      "solve_backward",
      [](const DiscreteOperator& op, const PotentialPair& pot, const L2Pair& phi_T,
         const EvolutionConfig& cfg, const py::object& f, const py::object& g) {
        return solve_backward(op, pot, wrap_source(f), wrap_source(g), phi_T, cfg);
      },
      py::arg("op"), py::arg("pot"), py::arg("phi_T"), py::arg("cfg"), py::arg("f") = py::none(),
      py::arg("g") = py::none());

  py::class_<StepControl>(m, "StepControl")
      .def_readonly("horizon", &StepControl::horizon)
      .def_readonly("values", &StepControl::values)
      .def("write_csv", &StepControl::write_csv);

  py::class_<CgDiagnostics>(m, "CgDiagnostics")
      .def_readonly("iterations", &CgDiagnostics::iterations)
      .def_readonly("residual", &CgDiagnostics::residual)
      .def_readonly("converged", &CgDiagnostics::converged);

  py::class_<ControlResult>(m, "ControlResult")
      .def_readonly("v", &ControlResult::v)
      .def_readonly("y", &ControlResult::y)
      .def_readonly("terminal_norm", &ControlResult::terminal_norm)
      .def_readonly("control_energy", &ControlResult::control_energy)
      .def_readonly("weighted_state_energy", &ControlResult::weighted_state_energy)
      .def_readonly("diag", &ControlResult::diag)
      .def_readonly("minimizer_phi_T", &ControlResult::minimizer_phi_T);

  m.def(
      "penalized_hum",
      [](const DiscreteOperator& op, const PotentialPair& pot, const L2Pair& y0,
         const ControlRegion& region, const EvolutionConfig& cfg, double epsilon, double cg_tol,
         int cg_max_iter) {
        return penalized_hum(op, pot, nullptr, nullptr, y0, region, cfg,
                             HumParams{epsilon, cg_tol, cg_max_iter});
      },
      py::arg("op"), py::arg("pot"), py::arg("y0"), py::arg("region"), py::arg("cfg"),
      py::arg("epsilon") = 1e-4, py::arg("cg_tol") = 1e-8, py::arg("cg_max_iter") = 500);

  py::class_<CarlemanWeights>(m, "CarlemanWeights")
      .def_readonly("s", &CarlemanWeights::s)
      .def_readonly("lambda_", &CarlemanWeights::lambda)
      .def_readonly("m", &CarlemanWeights::m)
      .def_readonly("eta0", &CarlemanWeights::eta0)
      .def("alpha", &CarlemanWeights::alpha, py::arg("t"), py::arg("eta"))
      .def("xi", &CarlemanWeights::xi, py::arg("t"), py::arg("eta"))
      .def("alpha_tilde", &CarlemanWeights::alpha_tilde)
      .def("xi_tilde", &CarlemanWeights::xi_tilde)
      .def("rho_eps", &CarlemanWeights::rho_eps);

  m.def("build_eta0", &build_eta0, py::arg("mesh"), py::arg("omega_prime"));
  m.def("make_weights", &make_weights, py::arg("mesh"), py::arg("eta0"), py::arg("s"),
        py::arg("lambda_"), py::arg("m"), py::arg("T"));

  m.def(
      "weighted_minimal_control",
      [](const DiscreteOperator& op, const PotentialPair& pot, const L2Pair& y0,
         const ControlRegion& region, const CarlemanWeights& cw, const EvolutionConfig& cfg,
         double eps_rho, double mu, double cg_tol, int cg_max_iter) {
        return weighted_minimal_control(op, pot, nullptr, nullptr, y0, region, cw, cfg,
                                        WeightedParams{eps_rho, mu, cg_tol, cg_max_iter});
      },
      py::arg("op"), py::arg("pot"), py::arg("y0"), py::arg("region"), py::arg("cw"),
      py::arg("cfg"), py::arg("eps_rho") = 0.5, py::arg("mu") = 1e-5, py::arg("cg_tol") = 1e-8,
      py::arg("cg_max_iter") = 500);

  py::class_<ObservabilityReport>(m, "ObservabilityReport")
      .def_readonly("constant", &ObservabilityReport::constant)
      .def_readonly("iterations", &ObservabilityReport::iterations)
      .def_readonly("residual", &ObservabilityReport::residual)
      .def_readonly("shift", &ObservabilityReport::shift)
      .def_readonly("maximizer", &ObservabilityReport::maximizer);

  m.def(
      "estimate_backward_observability",
      [](const DiscreteOperator& op, const PotentialPair& pot, const ControlRegion& region,
         const EvolutionConfig& cfg, double tol, double cg_tol, std::uint64_t seed) {
        ObservabilityParams params;
        params.tol = tol;
        params.cg_tol = cg_tol;
        params.seed = seed;
        return estimate_backward_observability(op, pot, region, cfg, params);
      },
      py::arg("op"), py::arg("pot"), py::arg("region"), py::arg("cfg"), py::arg("tol") = 1e-3,
      py::arg("cg_tol") = 1e-6, py::arg("seed") = 1);

  m.def("run_config", [](const std::string& path, const std::string& output_dir, long seed) {
    const ExperimentConfig cfg = parse_experiment_file(path);
    const auto outcome = run_experiment(cfg, output_dir.empty() ? cfg.output_dir : output_dir,
                                        seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.seed);
    return outcome.manifest_path;
  });

  m.def("run_verify_suite", [](const std::string& suite) {
    py::list out;
    for (const auto& r : run_verify_suite(suite))
      out.append(py::make_tuple(r.name, r.passed, r.detail));
    return out;
  });
}

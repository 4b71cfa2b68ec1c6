#include "dynbc/operators.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace dynbc {

PotentialPair PotentialPair::constants(const Mesh& mesh, double a_value, double b_value) {
  PotentialPair p;
  const int nb = mesh.n_bulk(), ns = mesh.n_boundary();
  if (a_value != 0.0)
    p.a = [nb, a_value](double) { return Eigen::VectorXd::Constant(nb, a_value).eval(); };
  if (b_value != 0.0)
    p.b = [ns, b_value](double) { return Eigen::VectorXd::Constant(ns, b_value).eval(); };
  p.bound = std::max(std::abs(a_value), std::abs(b_value));
  return p;
}

PotentialPair PotentialPair::tabulated(const Mesh& mesh, double horizon, Eigen::MatrixXd a_nodes,
                                       Eigen::MatrixXd b_nodes, double bound) {
  if (a_nodes.rows() != mesh.n_bulk() || b_nodes.rows() != mesh.n_boundary() ||
      a_nodes.cols() != b_nodes.cols() || a_nodes.cols() < 2)
    throw std::invalid_argument("PotentialPair::tabulated: table shape mismatch");
  const double amax = a_nodes.cwiseAbs().maxCoeff(), bmax = b_nodes.cwiseAbs().maxCoeff();
  if (!std::isfinite(amax) || !std::isfinite(bmax) || std::max(amax, bmax) > bound)
    throw std::invalid_argument("PotentialPair::tabulated: values exceed the declared bound");
  const int cols = static_cast<int>(a_nodes.cols());
  auto index = [horizon, cols](double t) {
    const double pos = t / horizon * (cols - 1);
    int m = static_cast<int>(std::lround(pos));
    m = std::min(std::max(m, 0), cols - 1);
    if (std::abs(pos - m) > 1e-8)
      throw std::invalid_argument("tabulated potential queried off the time grid");
    return m;
  };
  PotentialPair p;
  p.a = [A = std::move(a_nodes), index](double t) { return A.col(index(t)).eval(); };
  p.b = [B = std::move(b_nodes), index](double t) { return B.col(index(t)).eval(); };
  p.time_dependent = true;
  p.bound = bound;
  return p;
}

Eigen::VectorXd PotentialPair::eval_a(double t, int n_bulk) const {
  if (!a) return Eigen::VectorXd::Zero(n_bulk);
  Eigen::VectorXd v = a(t);
  if (v.size() != n_bulk) throw std::invalid_argument("potential a: wrong size");
  return v;
}

Eigen::VectorXd PotentialPair::eval_b(double t, int n_boundary) const {
  if (!b) return Eigen::VectorXd::Zero(n_boundary);
  Eigen::VectorXd v = b(t);
  if (v.size() != n_boundary) throw std::invalid_argument("potential b: wrong size");
  return v;
}

Eigen::VectorXd DiscreteOperator::to_coupled(const L2Pair& y) const {
  if (y.bulk.size() != mesh.n_bulk() || y.surface.size() != mesh.n_boundary())
    throw std::invalid_argument("to_coupled: field sizes do not match mesh");
  Eigen::VectorXd u = y.bulk;
  for (int k = 0; k < mesh.n_boundary(); ++k) {
    const int i = mesh.boundary_to_bulk[k];
    const double wb = mesh.bulk_weights[i], ws = mesh.boundary_weights[k];
    u[i] = (wb * y.bulk[i] + ws * y.surface[k]) / (wb + ws);
  }
  return u;
}

L2Pair DiscreteOperator::from_coupled(const Eigen::VectorXd& u) const {
  return {u, mesh.trace(u)};
}

Eigen::VectorXd DiscreteOperator::load(const Eigen::VectorXd* f_bulk,
                                       const Eigen::VectorXd* g_surface) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(size());
  if (f_bulk) s = mesh.bulk_weights.cwiseProduct(*f_bulk);
  if (g_surface)
    for (int k = 0; k < mesh.n_boundary(); ++k)
      s[mesh.boundary_to_bulk[k]] += mesh.boundary_weights[k] * (*g_surface)[k];
  return s;
}

Eigen::VectorXd DiscreteOperator::potential_diag(const PotentialPair& pot, double t) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(size());
  if (pot.a) p = mesh.bulk_weights.cwiseProduct(pot.eval_a(t, mesh.n_bulk()));
  if (pot.b) {
    const Eigen::VectorXd bv = pot.eval_b(t, mesh.n_boundary());
    for (int k = 0; k < mesh.n_boundary(); ++k)
      p[mesh.boundary_to_bulk[k]] += mesh.boundary_weights[k] * bv[k];
  }
  return p;
}

namespace {

int disk_node(const Mesh& mesh, int ring, int j) {
  if (ring == 0) return 0;
  return 1 + (ring - 1) * mesh.n_theta + ((j % mesh.n_theta) + mesh.n_theta) % mesh.n_theta;
}

}  // namespace

DiscreteOperator assemble(const Mesh& mesh, double d, double delta) {
  if (!(d > 0.0)) throw std::invalid_argument("assemble: need d > 0");
  if (delta < 0.0) throw std::invalid_argument("assemble: need delta >= 0");

  DiscreteOperator op;
  op.mesh = mesh;
  op.d = d;
  op.delta = delta;

  op.mass = mesh.bulk_weights;
  for (int k = 0; k < mesh.n_boundary(); ++k)
    op.mass[mesh.boundary_to_bulk[k]] += mesh.boundary_weights[k];

  std::vector<Eigen::Triplet<double>> trip;
  auto add_edge = [&trip](int i, int j, double c) {
    trip.emplace_back(i, i, c);
    trip.emplace_back(j, j, c);
    trip.emplace_back(i, j, -c);
    trip.emplace_back(j, i, -c);
  };

  if (mesh.kind == MeshKind::interval) {
    const double h = mesh.spacing();
    for (int i = 0; i < mesh.n; ++i) add_edge(i, i + 1, d / h);
    // delta * Laplace-Beltrami vanishes on a point boundary
  } else {
    const int n_r = mesh.n_r, n_t = mesh.n_theta;
    const double h = mesh.spacing();
    const double dtheta = 2.0 * std::numbers::pi / n_t;
    const double R = mesh.radius;

    // radial edges, flux area r_{i+1/2} dtheta
    for (int i = 0; i < n_r; ++i) {
      const double c = d * dtheta * (i + 0.5) * h / h;
      for (int j = 0; j < n_t; ++j) add_edge(disk_node(mesh, i, j), disk_node(mesh, i + 1, j), c);
    }
    // tangential edges, cellwise integral of 1/r
    for (int i = 1; i <= n_r; ++i) {
      const double r = i * h;
      const double r_in = r - h / 2;
      const double r_out = (i == n_r) ? R : r + h / 2;
      const double c = d * std::log(r_out / r_in) / dtheta;
      for (int j = 0; j < n_t; ++j) add_edge(disk_node(mesh, i, j), disk_node(mesh, i, j + 1), c);
    }
    // surface diffusion on the boundary circle
    if (delta > 0.0) {
      const double c = delta / (R * dtheta);
      for (int j = 0; j < n_t; ++j)
        add_edge(disk_node(mesh, n_r, j), disk_node(mesh, n_r, j + 1), c);
    }
  }

  op.stiffness.resize(mesh.n_bulk(), mesh.n_bulk());
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.stiffness.makeCompressed();
  return op;
}

L2Pair apply_operator(const DiscreteOperator& op, const PotentialPair& pot, double t,
                      const L2Pair& y) {
  const Eigen::VectorXd u = op.to_coupled(y);
  const Eigen::VectorXd au = -(op.stiffness * u).cwiseQuotient(op.mass);
  L2Pair out = op.from_coupled(au);
  if (pot.a) out.bulk -= pot.eval_a(t, op.mesh.n_bulk()).cwiseProduct(y.bulk);
  if (pot.b) out.surface -= pot.eval_b(t, op.mesh.n_boundary()).cwiseProduct(y.surface);
  return out;
}

SpectrumResult spectrum_smallest(const DiscreteOperator& op, int k) {
  const int n = op.size();
  if (k < 1 || k > n) throw std::invalid_argument("spectrum_smallest: need 1 <= k <= system size");
  if (n > 6000)
    throw std::invalid_argument("spectrum_smallest: dense eigensolve limited to 6000 unknowns");

  const Eigen::VectorXd dhalf = op.mass.cwiseSqrt();
  Eigen::MatrixXd S = Eigen::MatrixXd(op.stiffness);
  S = dhalf.cwiseInverse().asDiagonal() * S * dhalf.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("spectrum_smallest: eigenvalue iteration did not converge (n = " +
                             std::to_string(n) + ")");

  SpectrumResult res;
  res.values = eig.eigenvalues().head(k);
  res.modes.reserve(k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd x = eig.eigenvectors().col(i).cwiseQuotient(dhalf);
    const double s = std::sqrt(x.cwiseAbs2().dot(op.mass));
    res.modes.push_back(op.from_coupled(x / s));
  }
  return res;
}

void dump_operator_triplets(const DiscreteOperator& op, const std::string& stiffness_path,
                            const std::string& mass_path) {
  std::FILE* f = std::fopen(stiffness_path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + stiffness_path);
  for (int c = 0; c < op.stiffness.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.stiffness, c); it; ++it)
      std::fprintf(f, "%ld %ld %.17g\n", static_cast<long>(it.row()), static_cast<long>(it.col()),
                   it.value());
  std::fclose(f);
  f = std::fopen(mass_path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + mass_path);
  for (int i = 0; i < op.size(); ++i) std::fprintf(f, "%d %d %.17g\n", i, i, op.mass[i]);
  std::fclose(f);
}

Eigen::VectorXd bulk_gradient_sq(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.n_bulk()) throw std::invalid_argument("bulk_gradient_sq: size mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.n_bulk());

  if (mesh.kind == MeshKind::interval) {
    const double h = mesh.spacing();
    const int n = mesh.n;
    for (int i = 0; i <= n; ++i) {
      double ux;
      if (i == 0)
        ux = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h);
      else if (i == n)
        ux = (3 * u[n] - 4 * u[n - 1] + u[n - 2]) / (2 * h);
      else
        ux = (u[i + 1] - u[i - 1]) / (2 * h);
      g[i] = ux * ux;
    }
    return g;
  }

  const int n_r = mesh.n_r, n_t = mesh.n_theta;
  const double h = mesh.spacing();
  const double dtheta = 2.0 * std::numbers::pi / n_t;

  // origin: least-squares linear fit over the first ring
  double gx = 0.0, gy = 0.0;
  for (int j = 0; j < n_t; ++j) {
    const double th = j * dtheta;
    gx += u[disk_node(mesh, 1, j)] * std::cos(th);
    gy += u[disk_node(mesh, 1, j)] * std::sin(th);
  }
  gx *= 2.0 / (n_t * h);
  gy *= 2.0 / (n_t * h);
  g[0] = gx * gx + gy * gy;

  for (int i = 1; i <= n_r; ++i) {
    const double r = i * h;
    for (int j = 0; j < n_t; ++j) {
      const int id = disk_node(mesh, i, j);
      double ur;
      if (i == n_r)
        ur = (3 * u[id] - 4 * u[disk_node(mesh, i - 1, j)] + u[disk_node(mesh, i - 2, j)]) / (2 * h);
      else
        ur = (u[disk_node(mesh, i + 1, j)] - u[disk_node(mesh, i - 1, j)]) / (2 * h);
      const double ut =
          (u[disk_node(mesh, i, j + 1)] - u[disk_node(mesh, i, j - 1)]) / (2 * r * dtheta);
      g[id] = ur * ur + ut * ut;
    }
  }
  return g;
}

Eigen::VectorXd surface_gradient_sq(const Mesh& mesh, const Eigen::VectorXd& s) {
  if (s.size() != mesh.n_boundary())
    throw std::invalid_argument("surface_gradient_sq: size mismatch");
  if (mesh.kind == MeshKind::interval) return Eigen::VectorXd::Zero(2);
  const int n_t = mesh.n_theta;
  const double dl = mesh.radius * 2.0 * std::numbers::pi / n_t;
  Eigen::VectorXd g(n_t);
  for (int j = 0; j < n_t; ++j) {
    const double ds = (s[(j + 1) % n_t] - s[(j + n_t - 1) % n_t]) / (2 * dl);
    g[j] = ds * ds;
  }
  return g;
}

Eigen::VectorXd laplace_beltrami(const Mesh& mesh, const Eigen::VectorXd& s) {
  if (s.size() != mesh.n_boundary()) throw std::invalid_argument("laplace_beltrami: size mismatch");
  if (mesh.kind == MeshKind::interval) return Eigen::VectorXd::Zero(2);
  const int n_t = mesh.n_theta;
  const double dl = mesh.radius * 2.0 * std::numbers::pi / n_t;
  Eigen::VectorXd out(n_t);
  for (int j = 0; j < n_t; ++j)
    out[j] = (s[(j + 1) % n_t] - 2 * s[j] + s[(j + n_t - 1) % n_t]) / (dl * dl);
  return out;
}

Eigen::VectorXd normal_derivative(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.n_bulk()) throw std::invalid_argument("normal_derivative: size mismatch");
  if (mesh.kind == MeshKind::interval) {
    const double h = mesh.spacing();
    const int n = mesh.n;
    Eigen::VectorXd out(2);
    out[0] = (3 * u[0] - 4 * u[1] + u[2]) / (2 * h);
    out[1] = (3 * u[n] - 4 * u[n - 1] + u[n - 2]) / (2 * h);
    return out;
  }
  const int n_r = mesh.n_r, n_t = mesh.n_theta;
  const double h = mesh.spacing();
  Eigen::VectorXd out(n_t);
  for (int j = 0; j < n_t; ++j)
    out[j] = (3 * u[disk_node(mesh, n_r, j)] - 4 * u[disk_node(mesh, n_r - 1, j)] +
              u[disk_node(mesh, n_r - 2, j)]) /
             (2 * h);
  return out;
}

}  // namespace dynbc

#pragma once

#include "dynbc/fields.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace dynbc {

/// Bounded multiplier pair: a(t,x) on the bulk, b(t,x) on the boundary.
/// Null evaluators mean zero. `bound` is the sup-norm box the potentials are
/// required to stay in; evaluations are checked against it.
struct PotentialPair {
  std::function<Eigen::VectorXd(double)> a;  // -> values at bulk nodes
  std::function<Eigen::VectorXd(double)> b;  // -> values at boundary nodes
  bool time_dependent = false;
  double bound = 0.0;

  bool is_zero() const { return !a && !b; }

  static PotentialPair zero() { return {}; }
  static PotentialPair constants(const Mesh& mesh, double a_value, double b_value);

  /// Piecewise values at the trajectory's time nodes, nodal in space.
  static PotentialPair tabulated(const Mesh& mesh, double horizon,
                                 Eigen::MatrixXd a_nodes,   // n_bulk x (M+1)
                                 Eigen::MatrixXd b_nodes,   // n_boundary x (M+1)
                                 double bound);

  Eigen::VectorXd eval_a(double t, int n_bulk) const;
  Eigen::VectorXd eval_b(double t, int n_boundary) const;
};

/// Discrete realization of the operator A on the trace-coupled space. The
/// coupled unknowns are the bulk nodes; boundary values are identified with
/// the outermost ring. `stiffness` comes from the bilinear form
///   a[y,z] = d (grad y, grad z)_Omega + delta (grad_G y, grad_G z)_Gamma,
/// so it is symmetric positive semidefinite with constants in its kernel by
/// construction, and `mass` carries both the area and the surface measure.
/// The evolution reads A = -mass^{-1} K.
struct DiscreteOperator {
  Mesh mesh;
  double d = 1.0;
  double delta = 1.0;
  Eigen::VectorXd mass;                   // coupled diagonal
  Eigen::SparseMatrix<double> stiffness;  // coupled, symmetric

  int size() const { return static_cast<int>(mass.size()); }

  /// L2-orthogonal projection of an (possibly trace-incompatible) pair onto
  /// the coupled space: mass-weighted average at the boundary ring.
  Eigen::VectorXd to_coupled(const L2Pair& y) const;
  L2Pair from_coupled(const Eigen::VectorXd& u) const;

  /// Coupled load vector of the pair data (f, g): quadrature-weighted.
  Eigen::VectorXd load(const Eigen::VectorXd* f_bulk, const Eigen::VectorXd* g_surface) const;

  /// Diagonal of the coupled potential term: weight * a (+ surface weight * b
  /// on the ring). This is mass * B(t) in coupled coordinates.
  Eigen::VectorXd potential_diag(const PotentialPair& pot, double t) const;
};

DiscreteOperator assemble(const Mesh& mesh, double d, double delta);

/// A y - B(t) y on pairs. Uses the coupled projection for the A part, so
/// <apply(y), z> = <y, apply(z)> exactly when the potentials vanish.
L2Pair apply_operator(const DiscreteOperator& op, const PotentialPair& pot, double t,
                      const L2Pair& y);

struct SpectrumResult {
  Eigen::VectorXd values;      // k smallest eigenvalues of -A, ascending
  std::vector<L2Pair> modes;   // L2-normalized eigenpairs
};

/// Smallest eigenvalues of the pencil (K, mass). Dense solve; intended for
/// desk-scale diagnostics and regression tests.
SpectrumResult spectrum_smallest(const DiscreteOperator& op, int k);

/// Triplet text dump of stiffness and mass (row col value).
void dump_operator_triplets(const DiscreteOperator& op, const std::string& stiffness_path,
                            const std::string& mass_path);

// Nodal differential operators used by the Carleman diagnostic. All take
// coupled bulk fields (boundary ring included) or surface fields.
Eigen::VectorXd bulk_gradient_sq(const Mesh& mesh, const Eigen::VectorXd& u);
Eigen::VectorXd surface_gradient_sq(const Mesh& mesh, const Eigen::VectorXd& s);
Eigen::VectorXd laplace_beltrami(const Mesh& mesh, const Eigen::VectorXd& s);
Eigen::VectorXd normal_derivative(const Mesh& mesh, const Eigen::VectorXd& u);

}  // namespace dynbc

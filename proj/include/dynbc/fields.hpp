#pragma once

#include "dynbc/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dynbc {

/// A bulk field together with a surface field. The two components are
/// independent; no trace relation is assumed.
struct L2Pair {
  Eigen::VectorXd bulk;
  Eigen::VectorXd surface;

  static L2Pair zero(const Mesh& mesh) {
    return {Eigen::VectorXd::Zero(mesh.n_bulk()), Eigen::VectorXd::Zero(mesh.n_boundary())};
  }
  static L2Pair constant(const Mesh& mesh, double bulk_value, double surface_value) {
    return {Eigen::VectorXd::Constant(mesh.n_bulk(), bulk_value),
            Eigen::VectorXd::Constant(mesh.n_boundary(), surface_value)};
  }

  L2Pair& operator+=(const L2Pair& o) { bulk += o.bulk; surface += o.surface; return *this; }
  L2Pair& operator-=(const L2Pair& o) { bulk -= o.bulk; surface -= o.surface; return *this; }
  L2Pair& operator*=(double c) { bulk *= c; surface *= c; return *this; }
  friend L2Pair operator+(L2Pair a, const L2Pair& b) { a += b; return a; }
  friend L2Pair operator-(L2Pair a, const L2Pair& b) { a -= b; return a; }
  friend L2Pair operator*(double c, L2Pair a) { a *= c; return a; }
};

double inner(const L2Pair& a, const L2Pair& b, const Mesh& mesh);
double norm(const L2Pair& a, const Mesh& mesh);

/// Time-indexed states on the uniform grid t_m = m T / M, m = 0..M.
struct Trajectory {
  double horizon = 0.0;         // T
  std::vector<L2Pair> states;   // M + 1 entries

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double dt() const { return horizon / steps(); }
  double time(int m) const { return horizon * m / steps(); }
  const L2Pair& at(int m) const { return states[static_cast<size_t>(m)]; }
  L2Pair& at(int m) { return states[static_cast<size_t>(m)]; }

  static Trajectory zero(const Mesh& mesh, double horizon, int steps);
};

/// Nodewise weight at time t, as a pair of bulk/surface factors.
using SpaceTimeWeight = std::function<L2Pair(double t)>;

/// Composite trapezoidal rule in time of ||w(t) .* y(t)||^2 over the L2 pair
/// norm. Endpoint weights that evaluate to non-finite values contribute zero
/// (the continuous extension of the exponentially vanishing integrands);
/// non-finite weights at interior nodes are an error.
double weighted_time_norm_sq(const Trajectory& tr, const SpaceTimeWeight& w, const Mesh& mesh);
double weighted_time_norm(const Trajectory& tr, const SpaceTimeWeight& w, const Mesh& mesh);

/// Plain L2(0,T; L2) norm (w == 1).
double time_l2_norm(const Trajectory& tr, const Mesh& mesh);

/// Long-format CSV: t,node_id,component,value with component in {bulk,surface}.
void write_trajectory_csv(const Trajectory& tr, const std::string& path);

/// Single pair as CSV: node_id,component,value.
void write_pair_csv(const L2Pair& pair, const std::string& path);

/// Compact little-endian binary dump for exact round-tripping.
void write_trajectory_binary(const Trajectory& tr, const std::string& path);
Trajectory read_trajectory_binary(const std::string& path);

}  // namespace dynbc

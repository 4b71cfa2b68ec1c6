#include "dynbc/fields.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dynbc {

double inner(const L2Pair& a, const L2Pair& b, const Mesh& mesh) {
  if (a.bulk.size() != mesh.n_bulk() || b.bulk.size() != mesh.n_bulk() ||
      a.surface.size() != mesh.n_boundary() || b.surface.size() != mesh.n_boundary())
    throw std::invalid_argument("inner: field sizes do not match mesh");
  return (a.bulk.array() * b.bulk.array() * mesh.bulk_weights.array()).sum() +
         (a.surface.array() * b.surface.array() * mesh.boundary_weights.array()).sum();
}

double norm(const L2Pair& a, const Mesh& mesh) { return std::sqrt(inner(a, a, mesh)); }

Trajectory Trajectory::zero(const Mesh& mesh, double horizon, int steps) {
  Trajectory tr;
  tr.horizon = horizon;
  tr.states.assign(static_cast<size_t>(steps) + 1, L2Pair::zero(mesh));
  return tr;
}

namespace {

double weighted_state_sq(const L2Pair& w, const L2Pair& y, const Mesh& mesh) {
  double s = 0.0;
  for (int i = 0; i < mesh.n_bulk(); ++i) {
    const double v = y.bulk[i];
    if (v != 0.0) s += mesh.bulk_weights[i] * (w.bulk[i] * v) * (w.bulk[i] * v);
  }
  for (int k = 0; k < mesh.n_boundary(); ++k) {
    const double v = y.surface[k];
    if (v != 0.0) s += mesh.boundary_weights[k] * (w.surface[k] * v) * (w.surface[k] * v);
  }
  return s;
}

}  // namespace

double weighted_time_norm_sq(const Trajectory& tr, const SpaceTimeWeight& w, const Mesh& mesh) {
  const int M = tr.steps();
  if (M < 1) throw std::invalid_argument("weighted_time_norm: trajectory has no steps");
  const double dt = tr.dt();
  double acc = 0.0;
  for (int m = 0; m <= M; ++m) {
    const bool endpoint = (m == 0 || m == M);
    const L2Pair wm = w(tr.time(m));
    if (!wm.bulk.allFinite() || !wm.surface.allFinite()) {
      if (endpoint) continue;  // singular weight: integrand extends by zero
      throw std::invalid_argument("weighted_time_norm: non-finite weight at interior time node");
    }
    const double contrib = weighted_state_sq(wm, tr.at(m), mesh);
    if (!std::isfinite(contrib)) {
      if (endpoint) continue;
      throw std::invalid_argument("weighted_time_norm: non-finite integrand at interior time node");
    }
    acc += (endpoint ? dt / 2 : dt) * contrib;
  }
  return acc;
}

double weighted_time_norm(const Trajectory& tr, const SpaceTimeWeight& w, const Mesh& mesh) {
  return std::sqrt(weighted_time_norm_sq(tr, w, mesh));
}

double time_l2_norm(const Trajectory& tr, const Mesh& mesh) {
  const int M = tr.steps();
  const double dt = tr.dt();
  double acc = 0.0;
  for (int m = 0; m <= M; ++m) {
    const double tau = (m == 0 || m == M) ? dt / 2 : dt;
    acc += tau * inner(tr.at(m), tr.at(m), mesh);
  }
  return std::sqrt(acc);
}

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "t,node_id,component,value\n");
  for (int m = 0; m <= tr.steps(); ++m) {
    const double t = tr.time(m);
    const L2Pair& s = tr.at(m);
    for (int i = 0; i < s.bulk.size(); ++i)
      std::fprintf(f, "%.17g,%d,bulk,%.17g\n", t, static_cast<int>(i), s.bulk[i]);
    for (int k = 0; k < s.surface.size(); ++k)
      std::fprintf(f, "%.17g,%d,surface,%.17g\n", t, static_cast<int>(k), s.surface[k]);
  }
  std::fclose(f);
}

void write_pair_csv(const L2Pair& pair, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "node_id,component,value\n");
  for (int i = 0; i < pair.bulk.size(); ++i)
    std::fprintf(f, "%d,bulk,%.17g\n", static_cast<int>(i), pair.bulk[i]);
  for (int k = 0; k < pair.surface.size(); ++k)
    std::fprintf(f, "%d,surface,%.17g\n", static_cast<int>(k), pair.surface[k]);
  std::fclose(f);
}

void write_trajectory_binary(const Trajectory& tr, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const char magic[8] = {'d', 'y', 'n', 'b', 'c', 't', 'r', '1'};
  f.write(magic, 8);
  const int64_t M = tr.steps();
  const int64_t nb = tr.states.front().bulk.size();
  const int64_t ns = tr.states.front().surface.size();
  f.write(reinterpret_cast<const char*>(&tr.horizon), 8);
  f.write(reinterpret_cast<const char*>(&M), 8);
  f.write(reinterpret_cast<const char*>(&nb), 8);
  f.write(reinterpret_cast<const char*>(&ns), 8);
  for (const auto& s : tr.states) {
    f.write(reinterpret_cast<const char*>(s.bulk.data()), 8 * nb);
    f.write(reinterpret_cast<const char*>(s.surface.data()), 8 * ns);
  }
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, "dynbctr1", 8) != 0)
    throw std::runtime_error(path + ": not a trajectory dump");
  Trajectory tr;
  int64_t M = 0, nb = 0, ns = 0;
  f.read(reinterpret_cast<char*>(&tr.horizon), 8);
  f.read(reinterpret_cast<char*>(&M), 8);
  f.read(reinterpret_cast<char*>(&nb), 8);
  f.read(reinterpret_cast<char*>(&ns), 8);
  if (!f || M < 1 || nb < 0 || ns < 0) throw std::runtime_error(path + ": corrupt header");
  tr.states.resize(static_cast<size_t>(M) + 1);
  for (auto& s : tr.states) {
    s.bulk.resize(nb);
    s.surface.resize(ns);
    f.read(reinterpret_cast<char*>(s.bulk.data()), 8 * nb);
    f.read(reinterpret_cast<char*>(s.surface.data()), 8 * ns);
  }
  if (!f) throw std::runtime_error(path + ": truncated data");
  return tr;
}

}  // namespace dynbc

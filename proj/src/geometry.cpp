#include "dynbc/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace dynbc {

double Mesh::spacing() const {
  if (kind == MeshKind::disk) return radius / n_r;
  return length / n;
}

Eigen::VectorXd Mesh::trace(const Eigen::VectorXd& bulk_field) const {
  if (bulk_field.size() != n_bulk())
    throw std::invalid_argument("trace: bulk field size does not match mesh");
  Eigen::VectorXd out(n_boundary());
  for (int k = 0; k < n_boundary(); ++k) out[k] = bulk_field[boundary_to_bulk[k]];
  return out;
}

bool Mesh::is_boundary_bulk_node(int bulk_index) const {
  if (kind == MeshKind::interval) return bulk_index == 0 || bulk_index == n;
  return bulk_index >= 1 + (n_r - 1) * n_theta;
}

void Mesh::dump_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "id,x,y,weight,is_boundary\n");
  for (int i = 0; i < n_bulk(); ++i)
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%d\n", i, bulk_nodes(i, 0), bulk_nodes(i, 1),
                 bulk_weights[i], is_boundary_bulk_node(i) ? 1 : 0);
  std::fclose(f);
}

Mesh build_disk_mesh(int n_r, int n_theta, double radius) {
  if (n_r < 2 || n_theta < 3)
    throw std::invalid_argument("build_disk_mesh: need n_r >= 2 and n_theta >= 3");
  if (!(radius > 0.0)) throw std::invalid_argument("build_disk_mesh: radius must be positive");

  Mesh mesh;
  mesh.kind = MeshKind::disk;
  mesh.radius = radius;
  mesh.n_r = n_r;
  mesh.n_theta = n_theta;

  const double h = radius / n_r;
  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  const int n_bulk = 1 + n_r * n_theta;

  mesh.bulk_nodes.resize(n_bulk, 2);
  mesh.bulk_weights.resize(n_bulk);

  // Cell-ownership weights: ring i owns the annulus [r_i - h/2, r_i + h/2],
  // clipped at 0 and R. They sum to pi R^2 exactly.
  mesh.bulk_nodes(0, 0) = 0.0;
  mesh.bulk_nodes(0, 1) = 0.0;
  mesh.bulk_weights[0] = std::numbers::pi * (h / 2) * (h / 2);
  for (int i = 1; i <= n_r; ++i) {
    const double r = i * h;
    const double r_in = r - h / 2;
    const double r_out = (i == n_r) ? radius : r + h / 2;
    const double w = dtheta * 0.5 * (r_out * r_out - r_in * r_in);
    for (int j = 0; j < n_theta; ++j) {
      const int id = 1 + (i - 1) * n_theta + j;
      const double th = j * dtheta;
      mesh.bulk_nodes(id, 0) = r * std::cos(th);
      mesh.bulk_nodes(id, 1) = r * std::sin(th);
      mesh.bulk_weights[id] = w;
    }
  }

  mesh.boundary_nodes.resize(n_theta, 2);
  mesh.boundary_weights.resize(n_theta);
  mesh.boundary_to_bulk.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    const int id = 1 + (n_r - 1) * n_theta + j;
    mesh.boundary_nodes.row(j) = mesh.bulk_nodes.row(id);
    mesh.boundary_weights[j] = radius * dtheta;
    mesh.boundary_to_bulk[j] = id;
  }
  return mesh;
}

Mesh build_interval_mesh(int n, double length) {
  if (n < 2) throw std::invalid_argument("build_interval_mesh: need n >= 2 cells");
  if (!(length > 0.0)) throw std::invalid_argument("build_interval_mesh: length must be positive");

  Mesh mesh;
  mesh.kind = MeshKind::interval;
  mesh.length = length;
  mesh.n = n;

  const double h = length / n;
  mesh.bulk_nodes.resize(n + 1, 2);
  mesh.bulk_weights.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    mesh.bulk_nodes(i, 0) = i * h;
    mesh.bulk_nodes(i, 1) = 0.0;
    mesh.bulk_weights[i] = (i == 0 || i == n) ? h / 2 : h;
  }

  mesh.boundary_nodes.resize(2, 2);
  mesh.boundary_nodes << 0.0, 0.0, length, 0.0;
  mesh.boundary_weights = Eigen::VectorXd::Ones(2);  // counting measure
  mesh.boundary_to_bulk = {0, n};
  return mesh;
}

namespace {

bool inside(const Mesh& mesh, const RegionSpec& spec, int node) {
  const double x = mesh.bulk_nodes(node, 0);
  const double y = mesh.bulk_nodes(node, 1);
  if (const auto* d = std::get_if<DiskRegion>(&spec)) {
    const double dx = x - d->cx, dy = y - d->cy;
    return dx * dx + dy * dy < d->radius * d->radius;
  }
  const auto& seg = std::get<IntervalRegion>(spec);
  return x > seg.left && x < seg.right;
}

void check_strictly_contained(const Mesh& mesh, const RegionSpec& spec) {
  if (const auto* d = std::get_if<DiskRegion>(&spec)) {
    if (mesh.kind != MeshKind::disk)
      throw std::invalid_argument("control_mask: disk region on a non-disk mesh");
    if (!(d->radius > 0.0)) throw std::invalid_argument("control_mask: region radius must be positive");
    const double dist = std::hypot(d->cx, d->cy) + d->radius;
    if (dist >= mesh.radius)
      throw std::invalid_argument("control_mask: region closure touches the boundary; need omega strictly inside");
    return;
  }
  const auto& seg = std::get<IntervalRegion>(spec);
  if (mesh.kind != MeshKind::interval)
    throw std::invalid_argument("control_mask: interval region on a non-interval mesh");
  if (!(seg.right > seg.left)) throw std::invalid_argument("control_mask: empty interval region");
  if (seg.left <= 0.0 || seg.right >= mesh.length)
    throw std::invalid_argument("control_mask: region closure touches the boundary; need omega strictly inside");
}

}  // namespace

ControlRegion control_mask(const Mesh& mesh, const RegionSpec& spec) {
  check_strictly_contained(mesh, spec);

  ControlRegion region;
  region.descriptor = spec;
  region.indicator = Eigen::VectorXd::Zero(mesh.n_bulk());
  for (int i = 0; i < mesh.n_bulk(); ++i)
    if (inside(mesh, spec, i)) region.indicator[i] = 1.0;

  for (int k : mesh.boundary_to_bulk)
    if (region.indicator[k] != 0.0)
      throw std::invalid_argument("control_mask: region touches boundary nodes");
  if (region.indicator.sum() == 0.0)
    throw std::invalid_argument("control_mask: region contains no bulk nodes at this resolution");
  return region;
}

RegionSpec shrink_region(const RegionSpec& spec) {
  if (const auto* d = std::get_if<DiskRegion>(&spec))
    return DiskRegion{d->cx, d->cy, d->radius / 2};
  const auto& seg = std::get<IntervalRegion>(spec);
  const double mid = (seg.left + seg.right) / 2, half = (seg.right - seg.left) / 4;
  return IntervalRegion{mid - half, mid + half};
}

}  // namespace dynbc

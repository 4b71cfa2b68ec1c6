#pragma once

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace dynbc {

enum class MeshKind { disk, interval };

/// Discrete geometry: bulk nodes with quadrature weights plus boundary nodes
/// with surface quadrature. The boundary nodes coincide with the outermost
/// bulk ring (disk) or the two endpoints (interval); `boundary_to_bulk` is
/// the trace map.
///
/// Disk meshes use a tensor polar grid with a single shared origin node, so
/// the boundary is an exact uniform circle. Node ordering: origin, then rings
/// inside-out, each ring in angular order.
struct Mesh {
  MeshKind kind = MeshKind::disk;
  double radius = 0.0;  // disk only
  double length = 0.0;  // interval only
  int n_r = 0, n_theta = 0;  // disk resolution
  int n = 0;                 // interval resolution (cells)

  Eigen::MatrixX2d bulk_nodes;      // coordinates (interval: y == 0)
  Eigen::VectorXd bulk_weights;     // area (length) quadrature weights
  Eigen::MatrixX2d boundary_nodes;  // coordinates on the boundary
  Eigen::VectorXd boundary_weights; // arc-length weights; counting measure on the interval
  std::vector<int> boundary_to_bulk;

  int n_bulk() const { return static_cast<int>(bulk_nodes.rows()); }
  int n_boundary() const { return static_cast<int>(boundary_nodes.rows()); }

  /// Characteristic spacing (radial spacing for the disk).
  double spacing() const;

  /// Selects boundary values from a bulk field.
  Eigen::VectorXd trace(const Eigen::VectorXd& bulk_field) const;

  bool is_boundary_bulk_node(int bulk_index) const;

  /// Node table as CSV: id,x,y,weight,is_boundary.
  void dump_csv(const std::string& path) const;
};

Mesh build_disk_mesh(int n_r, int n_theta, double radius);
Mesh build_interval_mesh(int n, double length);

struct DiskRegion {
  double cx = 0.0, cy = 0.0;
  double radius = 0.0;
};

struct IntervalRegion {
  double left = 0.0, right = 0.0;
};

using RegionSpec = std::variant<DiskRegion, IntervalRegion>;

/// Indicator of an open control region strictly contained in the domain.
struct ControlRegion {
  Eigen::VectorXd indicator;  // 0/1 per bulk node
  RegionSpec descriptor;

  /// Quadrature measure of the region.
  double measure(const Mesh& mesh) const { return indicator.dot(mesh.bulk_weights); }
};

/// Builds the nodal indicator for `spec`. Fails if the region is empty after
/// discretization or if its closure is not strictly inside the domain.
ControlRegion control_mask(const Mesh& mesh, const RegionSpec& spec);

/// Concentric region at half the extent, used to anchor the Carleman weight.
RegionSpec shrink_region(const RegionSpec& spec);

}  // namespace dynbc

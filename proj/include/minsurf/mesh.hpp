#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/matcore.hpp"

namespace minsurf::graphsolve {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Triangle = std::array<int, 3>;
using matcore::GradientMatrix;

/// Conforming triangulation of a planar domain with P1 (piecewise-linear) elements.
/// Triangles are stored counter-clockwise; construction rejects degenerate or inverted ones.
class Mesh {
 public:
  Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<bool> boundary);

  /// Structured polar mesh of the unit disc. Node 0 is the centre, ring k (k = 1..rings)
  /// holds 6k nodes at radius k/rings, numbered counter-clockwise from angle 0.
  static Mesh unit_disc(int rings);
  /// cells x cells squares over [x0, x0 + side] x [y0, y0 + side], each split along the
  /// (i, j)-(i+1, j+1) diagonal. Node (i, j) has index j * (cells + 1) + i.
  static Mesh square(Vec2 lower_left, double side, int cells);
  static Mesh unit_square(int cells) { return square(Vec2(0, 0), 1.0, cells); }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  const Vec2& node(int i) const { return nodes_[i]; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  bool is_boundary(int i) const { return boundary_[i]; }
  const std::vector<bool>& boundary() const { return boundary_; }
  double area(int t) const { return areas_[t]; }
  double total_area() const;
  /// Largest edge length.
  double mesh_size() const;

  /// Rows are the gradients of the three barycentric (hat) functions on triangle t.
  const Eigen::Matrix<double, 3, 2>& shape_gradients(int t) const { return shape_grads_[t]; }

  std::vector<int> interior_nodes() const;
  std::vector<int> boundary_nodes() const;

  /// Nodes mapped by x -> M x; M must have positive determinant.
  Mesh transformed(const Mat2& M) const;
  /// Red refinement: every triangle split into four through edge midpoints. Old nodes keep
  /// their indices; midpoints are appended. Midpoints of boundary edges are boundary nodes.
  /// `midpoint_parents`, if given, receives the end points of the edge of every appended node.
  Mesh refined(std::vector<std::pair<int, int>>* midpoint_parents = nullptr) const;
  /// Sub-mesh of the triangles selected by `keep`, with compacted node numbering. Nodes on
  /// the rim of the selection become boundary nodes. `node_map` receives old indices.
  Mesh submesh(const std::vector<bool>& keep, std::vector<int>* node_map = nullptr) const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<bool> boundary_;
  std::vector<double> areas_;
  std::vector<Eigen::Matrix<double, 3, 2>> shape_grads_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Per-node values in R^n over a mesh; rows of `values` are nodes.
struct DiscreteMap {
  MeshPtr mesh;
  Eigen::MatrixXd values;

  DiscreteMap() = default;
  DiscreteMap(MeshPtr m, Eigen::MatrixXd v);

  int n() const { return static_cast<int>(values.cols()); }
  /// Constant gradient on triangle t, an n x 2 matrix.
  GradientMatrix gradient(int t) const;
  /// Area-weighted average of the adjacent triangle gradients at node i.
  std::vector<GradientMatrix> nodal_gradients() const;
};

/// Samples fn at every mesh node.
template <class Fn>
DiscreteMap sample_map(MeshPtr mesh, int n, Fn&& fn) {
  Eigen::MatrixXd v(mesh->num_nodes(), n);
  for (int i = 0; i < mesh->num_nodes(); ++i) v.row(i) = fn(mesh->node(i)).transpose();
  return DiscreteMap(std::move(mesh), std::move(v));
}

/// A triangle index plus barycentric coordinates.
struct Location {
  int triangle = -1;
  Eigen::Vector3d bary;
};

/// Bucket-grid point location over a triangulation whose node positions may differ from
/// any mesh's own (e.g. images of nodes under a map).
class PointLocator {
 public:
  PointLocator(std::vector<Vec2> positions, std::vector<Triangle> triangles);
  explicit PointLocator(const Mesh& mesh) : PointLocator(mesh.nodes(), mesh.triangles()) {}

  /// Triangle containing y (up to a relative slack of 1e-10 in barycentric coordinates).
  std::optional<Location> locate(const Vec2& y) const;
  /// Containing triangle if any, else the triangle with the least negative barycentric
  /// coordinate among the nearest bucket's candidates (coordinates then clamped).
  Location locate_nearest(const Vec2& y) const;

  const std::vector<Vec2>& positions() const { return pos_; }
  const std::vector<Triangle>& triangles() const { return tris_; }

 private:
  Eigen::Vector3d barycentric(int t, const Vec2& y) const;
  int bucket_of(const Vec2& y, bool clamp) const;

  std::vector<Vec2> pos_;
  std::vector<Triangle> tris_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double cell_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

/// P1 interpolation of `values` (rows = nodes) at a location.
Eigen::VectorXd interpolate(const Eigen::MatrixXd& values, const std::vector<Triangle>& triangles,
                            const Location& loc);

}  // namespace minsurf::graphsolve

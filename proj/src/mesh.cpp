#include "minsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "minsurf/errors.hpp"

namespace minsurf::graphsolve {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

std::map<std::pair<int, int>, int> edge_counts(const std::vector<Triangle>& tris) {
  std::map<std::pair<int, int>, int> counts;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) ++counts[edge_key(t[k], t[(k + 1) % 3])];
  return counts;
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<bool> boundary)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
  if (boundary_.size() != nodes_.size()) throw InvalidMesh("boundary flags must match node count");
  for (const auto& p : nodes_)
    if (!p.allFinite()) throw InvalidMesh("non-finite node coordinate");
  areas_.reserve(triangles_.size());
  shape_grads_.reserve(triangles_.size());
  const int nn = num_nodes();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k : tri)
      if (k < 0 || k >= nn) throw InvalidMesh("triangle " + std::to_string(t) + " references a missing node");
    const Vec2 &p0 = nodes_[tri[0]], &p1 = nodes_[tri[1]], &p2 = nodes_[tri[2]];
    const double a = signed_area(p0, p1, p2);
    const double scale = std::max({(p1 - p0).squaredNorm(), (p2 - p0).squaredNorm(), (p2 - p1).squaredNorm()});
    if (!(a > 1e-14 * scale))
      throw InvalidMesh("triangle " + std::to_string(t) + (a < 0 ? " is inverted" : " is degenerate"));
    Mat2 e;
    e.col(0) = p1 - p0;
    e.col(1) = p2 - p0;
    const Mat2 inv = e.inverse();
    Eigen::Matrix<double, 3, 2> g;
    g.row(1) = inv.row(0);
    g.row(2) = inv.row(1);
    g.row(0) = -(inv.row(0) + inv.row(1));
    areas_.push_back(a);
    shape_grads_.push_back(g);
  }
}

Mesh Mesh::unit_disc(int rings) {
  if (rings < 1) throw InvalidInput("unit_disc: need at least one ring");
  std::vector<Vec2> nodes{Vec2::Zero()};
  std::vector<bool> boundary{rings == 0};
  auto ring_start = [](int k) { return 1 + 3 * k * (k - 1); };
  for (int k = 1; k <= rings; ++k) {
    const int m = 6 * k;
    const double r = static_cast<double>(k) / rings;
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * std::numbers::pi * j / m;
      nodes.emplace_back(r * std::cos(th), r * std::sin(th));
      boundary.push_back(k == rings);
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(6 * rings * rings);
  auto add = [&](int a, int b, int c) {
    if (signed_area(nodes[a], nodes[b], nodes[c]) < 0) std::swap(b, c);
    tris.push_back({a, b, c});
  };
  for (int j = 0; j < 6; ++j) add(0, ring_start(1) + j, ring_start(1) + (j + 1) % 6);
  for (int k = 2; k <= rings; ++k) {
    const int mi = 6 * (k - 1), mo = 6 * k;
    const int si = ring_start(k - 1), so = ring_start(k);
    int i = 0, j = 0;
    while (i < mi || j < mo) {
      // Advance along whichever ring has the smaller next angle.
      const bool outer = j < mo && (i >= mi || (j + 1) * mi <= (i + 1) * mo);
      if (outer) {
        add(si + i % mi, so + j, so + (j + 1) % mo);
        ++j;
      } else {
        add(si + i, so + j % mo, si + (i + 1) % mi);
        ++i;
      }
    }
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

Mesh Mesh::square(Vec2 lower_left, double side, int cells) {
  if (cells < 1 || !(side > 0)) throw InvalidInput("square: need cells >= 1 and side > 0");
  const int m = cells + 1;
  const double h = side / cells;
  std::vector<Vec2> nodes;
  std::vector<bool> boundary;
  nodes.reserve(m * m);
  boundary.reserve(m * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      nodes.emplace_back(lower_left.x() + i * h, lower_left.y() + j * h);
      boundary.push_back(i == 0 || j == 0 || i == cells || j == cells);
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(2 * cells * cells);
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const int p00 = j * m + i, p10 = p00 + 1, p01 = p00 + m, p11 = p01 + 1;
      tris.push_back({p00, p10, p11});
      tris.push_back({p00, p11, p01});
    }
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (const auto& t : triangles_)
    for (int k = 0; k < 3; ++k) h = std::max(h, (nodes_[t[k]] - nodes_[t[(k + 1) % 3]]).norm());
  return h;
}

std::vector<int> Mesh::interior_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < num_nodes(); ++i)
    if (!boundary_[i]) out.push_back(i);
  return out;
}

std::vector<int> Mesh::boundary_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < num_nodes(); ++i)
    if (boundary_[i]) out.push_back(i);
  return out;
}

Mesh Mesh::transformed(const Mat2& M) const {
  if (!(M.determinant() > 0)) throw InvalidInput("transformed: map must preserve orientation");
  std::vector<Vec2> nodes;
  nodes.reserve(nodes_.size());
  for (const auto& p : nodes_) nodes.push_back(M * p);
  return Mesh(std::move(nodes), triangles_, boundary_);
}

Mesh Mesh::refined(std::vector<std::pair<int, int>>* midpoint_parents) const {
  const auto counts = edge_counts(triangles_);
  std::vector<Vec2> nodes = nodes_;
  std::vector<bool> boundary = boundary_;
  std::map<std::pair<int, int>, int> mid;
  if (midpoint_parents) midpoint_parents->clear();
  for (const auto& [e, c] : counts) {
    mid[e] = static_cast<int>(nodes.size());
    if (midpoint_parents) midpoint_parents->push_back(e);
    nodes.push_back(0.5 * (nodes_[e.first] + nodes_[e.second]));
    boundary.push_back(c == 1);
  }
  std::vector<Triangle> tris;
  tris.reserve(4 * triangles_.size());
  for (const auto& t : triangles_) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = mid.at(edge_key(a, b)), bc = mid.at(edge_key(b, c)), ca = mid.at(edge_key(c, a));
    tris.push_back({a, ab, ca});
    tris.push_back({ab, b, bc});
    tris.push_back({ca, bc, c});
    tris.push_back({ab, bc, ca});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

Mesh Mesh::submesh(const std::vector<bool>& keep, std::vector<int>* node_map) const {
  if (keep.size() != triangles_.size()) throw InvalidInput("submesh: selection size mismatch");
  std::vector<Triangle> kept;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    if (keep[t]) kept.push_back(triangles_[t]);
  if (kept.empty()) throw InvalidMesh("submesh: empty selection");
  std::vector<int> new_index(nodes_.size(), -1);
  std::vector<int> old_index;
  for (auto& t : kept) {
    for (int& k : t) {
      if (new_index[k] < 0) {
        new_index[k] = static_cast<int>(old_index.size());
        old_index.push_back(k);
      }
      k = new_index[k];
    }
  }
  std::vector<Vec2> nodes;
  nodes.reserve(old_index.size());
  for (int k : old_index) nodes.push_back(nodes_[k]);
  std::vector<bool> boundary(old_index.size(), false);
  for (const auto& [e, c] : edge_counts(kept)) {
    if (c == 1) boundary[e.first] = boundary[e.second] = true;
  }
  if (node_map) *node_map = old_index;
  return Mesh(std::move(nodes), std::move(kept), std::move(boundary));
}

DiscreteMap::DiscreteMap(MeshPtr m, Eigen::MatrixXd v) : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw InvalidInput("DiscreteMap: null mesh");
  if (values.rows() != mesh->num_nodes()) throw InvalidInput("DiscreteMap: value count must equal node count");
  if (values.cols() < 1) throw InvalidInput("DiscreteMap: codimension must be >= 1");
  if (!values.allFinite()) throw InvalidInput("DiscreteMap: non-finite value");
}

GradientMatrix DiscreteMap::gradient(int t) const {
  const auto& tri = mesh->triangle(t);
  const auto& g = mesh->shape_gradients(t);
  const Eigen::VectorXd d1 = (values.row(tri[1]) - values.row(tri[0])).transpose();
  const Eigen::VectorXd d2 = (values.row(tri[2]) - values.row(tri[0])).transpose();
  return d1 * g.row(1) + d2 * g.row(2);
}

std::vector<GradientMatrix> DiscreteMap::nodal_gradients() const {
  std::vector<GradientMatrix> acc(mesh->num_nodes(), GradientMatrix::Zero(n(), 2));
  std::vector<double> w(mesh->num_nodes(), 0.0);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const GradientMatrix g = gradient(t);
    for (int k : mesh->triangle(t)) {
      acc[k] += mesh->area(t) * g;
      w[k] += mesh->area(t);
    }
  }
  for (int i = 0; i < mesh->num_nodes(); ++i)
    if (w[i] > 0) acc[i] /= w[i];
  return acc;
}

PointLocator::PointLocator(std::vector<Vec2> positions, std::vector<Triangle> triangles)
    : pos_(std::move(positions)), tris_(std::move(triangles)) {
  if (pos_.empty() || tris_.empty()) throw InvalidInput("PointLocator: empty triangulation");
  lo_ = hi_ = pos_[0];
  for (const auto& p : pos_) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const Vec2 ext = (hi_ - lo_).cwiseMax(1e-12);
  cell_ = std::sqrt(ext.x() * ext.y() / static_cast<double>(tris_.size())) * 1.5;
  if (!(cell_ > 0)) cell_ = std::max(ext.x(), ext.y());
  nx_ = std::clamp(static_cast<int>(std::ceil(ext.x() / cell_)), 1, 4096);
  ny_ = std::clamp(static_cast<int>(std::ceil(ext.y() / cell_)), 1, 4096);
  cell_ = std::max(ext.x() / nx_, ext.y() / ny_);
  nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    Vec2 a = pos_[tris_[t][0]], b = a;
    for (int k : tris_[t]) {
      a = a.cwiseMin(pos_[k]);
      b = b.cwiseMax(pos_[k]);
    }
    const int i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
  }
}

Eigen::Vector3d PointLocator::barycentric(int t, const Vec2& y) const {
  const Vec2 &p0 = pos_[tris_[t][0]], &p1 = pos_[tris_[t][1]], &p2 = pos_[tris_[t][2]];
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
  const Vec2 d = y - p0;
  const double l1 = (d.x() * (p2.y() - p0.y()) - d.y() * (p2.x() - p0.x())) / det;
  const double l2 = ((p1.x() - p0.x()) * d.y() - (p1.y() - p0.y()) * d.x()) / det;
  return {1.0 - l1 - l2, l1, l2};
}

int PointLocator::bucket_of(const Vec2& y, bool clamp) const {
  int i = static_cast<int>(std::floor((y.x() - lo_.x()) / cell_));
  int j = static_cast<int>(std::floor((y.y() - lo_.y()) / cell_));
  if (clamp) {
    i = std::clamp(i, 0, nx_ - 1);
    j = std::clamp(j, 0, ny_ - 1);
  } else {
    // Points on the max edge of the bounding box belong to the last bucket.
    if (i == nx_ && y.x() <= hi_.x()) i = nx_ - 1;
    if (j == ny_ && y.y() <= hi_.y()) j = ny_ - 1;
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  }
  return j * nx_ + i;
}

std::optional<Location> PointLocator::locate(const Vec2& y) const {
  const int b = bucket_of(y, false);
  if (b < 0) return std::nullopt;
  Location best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[b]) {
    const Eigen::Vector3d l = barycentric(t, y);
    const double m = l.minCoeff();
    if (m > best_min) {
      best_min = m;
      best = {t, l};
    }
  }
  if (best.triangle < 0 || best_min < -1e-10) return std::nullopt;
  return best;
}

Location PointLocator::locate_nearest(const Vec2& y) const {
  if (auto loc = locate(y)) return *loc;
  const int b = bucket_of(y, true);
  const int bi = b % nx_, bj = b / nx_;
  Location best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int radius = 1; best.triangle < 0 || radius <= 2; ++radius) {
    for (int j = std::max(0, bj - radius); j <= std::min(ny_ - 1, bj + radius); ++j) {
      for (int i = std::max(0, bi - radius); i <= std::min(nx_ - 1, bi + radius); ++i) {
        for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
          const Eigen::Vector3d l = barycentric(t, y);
          if (l.minCoeff() > best_min) {
            best_min = l.minCoeff();
            best = {t, l};
          }
        }
      }
    }
    if (radius > nx_ + ny_) break;
  }
  best.bary = best.bary.cwiseMax(0.0);
  best.bary /= best.bary.sum();
  return best;
}

Eigen::VectorXd interpolate(const Eigen::MatrixXd& values, const std::vector<Triangle>& triangles,
                            const Location& loc) {
  const auto& t = triangles[loc.triangle];
  return (loc.bary(0) * values.row(t[0]) + loc.bary(1) * values.row(t[1]) + loc.bary(2) * values.row(t[2]))
      .transpose();
}

}  // namespace minsurf::graphsolve

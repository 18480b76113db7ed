#include "minsurf/graphsolve.hpp"

#include <cmath>
#include <deque>

namespace minsurf::graphsolve {

namespace {

GradientMatrix triangle_gradient(const Mesh& mesh, const Eigen::MatrixXd& values, int t) {
  const auto& tri = mesh.triangle(t);
  const auto& g = mesh.shape_gradients(t);
  const Eigen::VectorXd d1 = (values.row(tri[1]) - values.row(tri[0])).transpose();
  const Eigen::VectorXd d2 = (values.row(tri[2]) - values.row(tri[0])).transpose();
  return d1 * g.row(1) + d2 * g.row(2);
}

// Scatter a per-triangle n x 2 flux P into rows: r_i += |T| P grad(phi_i).
void scatter_flux(const Mesh& mesh, int t, const Eigen::MatrixXd& flux, Eigen::MatrixXd& out) {
  const auto& tri = mesh.triangle(t);
  const auto& g = mesh.shape_gradients(t);
  const double a = mesh.area(t);
  for (int k = 0; k < 3; ++k) out.row(tri[k]) += a * (flux * g.row(k).transpose()).transpose();
}

void zero_boundary_rows(const Mesh& mesh, Eigen::MatrixXd& m) {
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.is_boundary(i)) m.row(i).setZero();
}

}  // namespace

double assemble_energy(const DiscreteMap& u) {
  double e = 0.0;
  for (int t = 0; t < u.mesh->num_triangles(); ++t) e += matcore::area(u.gradient(t)) * u.mesh->area(t);
  return e;
}

double energy_difference(const DiscreteMap& u, const Eigen::MatrixXd& step) {
  if (step.rows() != u.values.rows() || step.cols() != u.values.cols())
    throw InvalidInput("energy_difference: step shape mismatch");
  const Mesh& mesh = *u.mesh;
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const GradientMatrix z0 = u.gradient(t);
    const GradientMatrix d = triangle_gradient(mesh, step, t);
    const GradientMatrix z1 = z0 + d;
    // A1^2 - A0^2 expanded so that no O(1) terms cancel.
    double diff = (d.array() * (2.0 * z0 + d).array()).sum();
    for (Eigen::Index a = 0; a < z0.rows(); ++a) {
      for (Eigen::Index b = a + 1; b < z0.rows(); ++b) {
        const double det0 = z0(a, 0) * z0(b, 1) - z0(a, 1) * z0(b, 0);
        const double det1 = z1(a, 0) * z1(b, 1) - z1(a, 1) * z1(b, 0);
        const double ddet = d(a, 0) * z0(b, 1) + z0(a, 0) * d(b, 1) + d(a, 0) * d(b, 1) -
                            (d(a, 1) * z0(b, 0) + z0(a, 1) * d(b, 0) + d(a, 1) * d(b, 0));
        diff += ddet * (det0 + det1);
      }
    }
    total += diff / (matcore::area(z0) + matcore::area(z1)) * mesh.area(t);
  }
  return total;
}

Eigen::MatrixXd assemble_gradient(const DiscreteMap& u) {
  const Mesh& mesh = *u.mesh;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mesh.num_nodes(), u.n());
  for (int t = 0; t < mesh.num_triangles(); ++t) scatter_flux(mesh, t, matcore::area_gradient(u.gradient(t)), g);
  zero_boundary_rows(mesh, g);
  return g;
}

Eigen::MatrixXd assemble_inner_variation(const DiscreteMap& u) {
  const Mesh& mesh = *u.mesh;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(mesh.num_nodes(), 2);
  for (int t = 0; t < mesh.num_triangles(); ++t) scatter_flux(mesh, t, matcore::inner_stress(u.gradient(t)), r);
  zero_boundary_rows(mesh, r);
  return r;
}

InteriorLaplacian::InteriorLaplacian(const Mesh& mesh) : mesh_(&mesh), slot_(mesh.num_nodes(), -1) {
  std::vector<int> bslot(mesh.num_nodes(), -1);
  int nb = 0;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.is_boundary(i)) {
      bslot[i] = nb++;
    } else {
      slot_[i] = static_cast<int>(interior_.size());
      interior_.push_back(i);
    }
  }
  std::vector<Eigen::Triplet<double>> tii, tib;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& g = mesh.shape_gradients(t);
    for (int a = 0; a < 3; ++a) {
      if (slot_[tri[a]] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const double v = mesh.area(t) * g.row(a).dot(g.row(b));
        if (slot_[tri[b]] >= 0)
          tii.emplace_back(slot_[tri[a]], slot_[tri[b]], v);
        else
          tib.emplace_back(slot_[tri[a]], bslot[tri[b]], v);
      }
    }
  }
  const int ni = num_interior();
  k_ii_.resize(ni, ni);
  k_ii_.setFromTriplets(tii.begin(), tii.end());
  k_ib_.resize(ni, nb);
  k_ib_.setFromTriplets(tib.begin(), tib.end());
  if (ni > 0) {
    ldlt_.compute(k_ii_);
    if (ldlt_.info() != Eigen::Success) throw InvalidMesh("stiffness factorization failed");
  }
}

Eigen::MatrixXd InteriorLaplacian::solve(const Eigen::MatrixXd& node_field) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(node_field.rows(), node_field.cols());
  if (interior_.empty()) return out;
  Eigen::MatrixXd rhs(interior_.size(), node_field.cols());
  for (std::size_t k = 0; k < interior_.size(); ++k) rhs.row(k) = node_field.row(interior_[k]);
  const Eigen::MatrixXd x = ldlt_.solve(rhs);
  for (std::size_t k = 0; k < interior_.size(); ++k) out.row(interior_[k]) = x.row(k);
  return out;
}

double InteriorLaplacian::dual_norm(const Eigen::MatrixXd& node_residual) const {
  if (interior_.empty()) return 0.0;
  const Eigen::MatrixXd x = solve(node_residual);
  double s = 0.0;
  for (int i : interior_) s += node_residual.row(i).dot(x.row(i));
  return std::sqrt(std::max(0.0, s));
}

Eigen::MatrixXd InteriorLaplacian::harmonic_extension(const Eigen::MatrixXd& values) const {
  Eigen::MatrixXd out = values;
  if (interior_.empty()) return out;
  Eigen::MatrixXd ub(k_ib_.cols(), values.cols());
  int nb = 0;
  for (int i = 0; i < mesh_->num_nodes(); ++i)
    if (mesh_->is_boundary(i)) ub.row(nb++) = values.row(i);
  const Eigen::MatrixXd x = ldlt_.solve(Eigen::MatrixXd(-(k_ib_ * ub)));
  for (std::size_t k = 0; k < interior_.size(); ++k) out.row(interior_[k]) = x.row(k);
  return out;
}

double outer_variation_residual(const DiscreteMap& u) {
  return InteriorLaplacian(*u.mesh).dual_norm(assemble_gradient(u));
}

double inner_variation_residual(const DiscreteMap& u) {
  return InteriorLaplacian(*u.mesh).dual_norm(assemble_inner_variation(u));
}

DiscreteMap prolong(const DiscreteMap& u) {
  std::vector<std::pair<int, int>> parents;
  auto fine = std::make_shared<const Mesh>(u.mesh->refined(&parents));
  Eigen::MatrixXd v(fine->num_nodes(), u.n());
  v.topRows(u.mesh->num_nodes()) = u.values;
  for (std::size_t k = 0; k < parents.size(); ++k)
    v.row(u.mesh->num_nodes() + k) = 0.5 * (u.values.row(parents[k].first) + u.values.row(parents[k].second));
  return DiscreteMap(std::move(fine), std::move(v));
}

double outer_variation_residual_refined(const DiscreteMap& u) { return outer_variation_residual(prolong(u)); }

double inner_variation_residual_refined(const DiscreteMap& u) { return inner_variation_residual(prolong(u)); }

SmallDetReport small_det_check(const DiscreteMap& u, double eps) {
  SmallDetReport r;
  for (int t = 0; t < u.mesh->num_triangles(); ++t) r.max_minor = std::max(r.max_minor, matcore::max_abs_minor(u.gradient(t)));
  r.pass = r.max_minor <= eps;
  return r;
}

void SolveConfig::validate() const {
  if (!(tolerance > 0)) throw InvalidInput("SolveConfig: tolerance must be positive");
  if (!(backtrack > 0 && backtrack < 1)) throw InvalidInput("SolveConfig: backtrack factor must lie in (0, 1)");
  if (!(sufficient_decrease > 0 && sufficient_decrease < 1))
    throw InvalidInput("SolveConfig: sufficient-decrease constant must lie in (0, 1)");
  if (max_iterations < 0 || memory < 0 || max_backtracks < 1) throw InvalidInput("SolveConfig: negative count");
}

BoundaryData sample_boundary(const Mesh& mesh, int n, const std::function<Eigen::VectorXd(const Vec2&)>& fn) {
  const auto nodes = mesh.boundary_nodes();
  BoundaryData b(nodes.size(), n);
  for (std::size_t k = 0; k < nodes.size(); ++k) b.row(k) = fn(mesh.node(nodes[k])).transpose();
  return b;
}

std::function<Eigen::VectorXd(const Vec2&)> boundary_preset(const std::string& name, int n, double scale) {
  if (n < 1) throw InvalidInput("boundary_preset: n must be >= 1");
  if (name == "affine") {
    return [n, scale](const Vec2& p) {
      Eigen::VectorXd v(n);
      for (int l = 0; l < n; ++l) v(l) = scale * ((1.0 - 0.25 * l) * p.x() + (0.5 + 0.1 * l) * p.y() + 0.1 * l);
      return v;
    };
  }
  if (name == "holo-z2") {
    return [n, scale](const Vec2& p) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      v(0) = scale * (p.x() * p.x() - p.y() * p.y());
      if (n > 1) v(1) = scale * 2.0 * p.x() * p.y();
      return v;
    };
  }
  if (name == "paraboloid") {
    return [n, scale](const Vec2& p) { return Eigen::VectorXd::Constant(n, scale * p.squaredNorm()); };
  }
  throw InvalidInput("unknown boundary preset '" + name + "'");
}

SolveResult minimize(const BoundaryData& boundary, const SolveConfig& config, MeshPtr mesh) {
  config.validate();
  if (!mesh) throw InvalidInput("minimize: null mesh");
  const auto bnodes = mesh->boundary_nodes();
  if (boundary.rows() != static_cast<Eigen::Index>(bnodes.size()) || boundary.cols() < 1)
    throw InvalidInput("minimize: boundary data must have one row per boundary node");
  if (!boundary.allFinite()) throw InvalidInput("minimize: non-finite boundary data");

  const InteriorLaplacian lap(*mesh);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(mesh->num_nodes(), boundary.cols());
  for (std::size_t k = 0; k < bnodes.size(); ++k) values.row(bnodes[k]) = boundary.row(k);
  if (config.initializer == Initializer::kHarmonic) values = lap.harmonic_extension(values);

  SolveResult res;
  res.map = DiscreteMap(mesh, std::move(values));
  res.energy = assemble_energy(res.map);
  res.energy_history.push_back(res.energy);
  const double stop = config.tolerance * std::sqrt(static_cast<double>(std::max(1, lap.num_interior())));

  Eigen::MatrixXd g = assemble_gradient(res.map);
  std::deque<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> history;  // (s, y)
  auto inner = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); };

  for (;;) {
    res.gradient_norm = g.norm();
    res.gradient_history.push_back(res.gradient_norm);
    if (res.gradient_norm <= stop) return res;
    if (res.iterations >= config.max_iterations)
      throw MinimizeError("minimize: iteration limit reached", std::move(res));

    // Two-loop recursion with H0 = K_II^{-1}.
    Eigen::MatrixXd q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      const auto& [s, y] = history[k];
      alpha[k] = inner(s, q) / inner(y, s);
      q -= alpha[k] * y;
    }
    Eigen::MatrixXd d = lap.solve(q);
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& [s, y] = history[k];
      const double beta = inner(y, d) / inner(y, s);
      d += (alpha[k] - beta) * s;
    }
    d = -d;
    double slope = inner(g, d);
    if (!(slope < 0)) {
      history.clear();
      d = -lap.solve(g);
      slope = inner(g, d);
    }

    double step = 1.0;
    double de = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < config.max_backtracks; ++bt, step *= config.backtrack) {
      de = energy_difference(res.map, step * d);
      if (de <= config.sufficient_decrease * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) throw MinimizeError("minimize: line search stalled", std::move(res));

    const Eigen::MatrixXd s = step * d;
    res.map.values += s;
    res.energy += de;
    res.energy_history.push_back(res.energy);
    ++res.iterations;
    Eigen::MatrixXd g_new = assemble_gradient(res.map);
    Eigen::MatrixXd y = g_new - g;
    if (config.memory > 0 && inner(s, y) > 1e-300) {
      history.emplace_back(s, std::move(y));
      if (static_cast<int>(history.size()) > config.memory) history.pop_front();
    }
    g = std::move(g_new);
  }
}

}  // namespace minsurf::graphsolve

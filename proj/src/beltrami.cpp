#include "minsurf/beltrami.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "minsurf/errors.hpp"

namespace minsurf::beltrami {

namespace {

// FFTW planning is not thread-safe; execution on separate plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft2 {
 public:
  explicit Fft2(int n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_ = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    fwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  // out = IFFT(symbol * FFT(in)), normalized.
  void multiply(const std::vector<cplx>& in, const std::vector<cplx>& symbol, std::vector<cplx>& out) {
    auto* b = reinterpret_cast<cplx*>(buf_);
    const std::size_t total = in.size();
    std::copy(in.begin(), in.end(), b);
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < total; ++k) b[k] *= symbol[k];
    fftw_execute(bwd_);
    out.resize(total);
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t k = 0; k < total; ++k) out[k] = b[k] * scale;
  }

 private:
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Fourth-order first derivative of a strided line of n samples.
void derivative_line(const cplx* f, std::size_t stride, int n, double h, cplx* out) {
  auto F = [&](int i) { return f[static_cast<std::size_t>(i) * stride]; };
  auto O = [&](int i) -> cplx& { return out[static_cast<std::size_t>(i) * stride]; };
  const double c = 1.0 / (12.0 * h);
  O(0) = c * (-25.0 * F(0) + 48.0 * F(1) - 36.0 * F(2) + 16.0 * F(3) - 3.0 * F(4));
  O(1) = c * (-3.0 * F(0) - 10.0 * F(1) + 18.0 * F(2) - 6.0 * F(3) + F(4));
  for (int i = 2; i < n - 2; ++i) O(i) = c * (F(i - 2) - 8.0 * F(i - 1) + 8.0 * F(i + 1) - F(i + 2));
  O(n - 2) = -c * (-3.0 * F(n - 1) - 10.0 * F(n - 2) + 18.0 * F(n - 3) - 6.0 * F(n - 4) + F(n - 5));
  O(n - 1) = -c * (-25.0 * F(n - 1) + 48.0 * F(n - 2) - 36.0 * F(n - 3) + 16.0 * F(n - 4) - 3.0 * F(n - 5));
}

double orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
}

std::vector<Vec2> image_positions(const PlanarMap& phi) {
  if (phi.n() != 2) throw InvalidInput("planar map must have two components");
  std::vector<Vec2> pos(phi.values.rows());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = phi.values.row(i).transpose();
  for (int t = 0; t < phi.mesh->num_triangles(); ++t) {
    const auto& tri = phi.mesh->triangle(t);
    if (!(orientation(pos[tri[0]], pos[tri[1]], pos[tri[2]]) > 0))
      throw NotInjective("map reverses or collapses cell " + std::to_string(t));
  }
  return pos;
}

Eigen::MatrixXd stiffness_times(const Mesh& mesh, const Eigen::MatrixXd& values) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(values.rows(), values.cols());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& g = mesh.shape_gradients(t);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(values.cols(), 2);
    for (int k = 0; k < 3; ++k) grad += values.row(tri[k]).transpose() * g.row(k);
    for (int k = 0; k < 3; ++k) r.row(tri[k]) += mesh.area(t) * (grad * g.row(k).transpose()).transpose();
  }
  return r;
}

}  // namespace

ComplexGrid::ComplexGrid(int n, double half_width) : ComplexGrid(n, half_width, std::vector<cplx>(static_cast<std::size_t>(std::max(n, 0)) * std::max(n, 0))) {}

ComplexGrid::ComplexGrid(int n, double half_width, std::vector<cplx> values)
    : n_(n), half_width_(half_width), values_(std::move(values)) {
  if (!power_of_two(n) || n < 8) throw InvalidInput("ComplexGrid: size must be a power of two >= 8");
  if (!(half_width >= 2.0) || !std::isfinite(half_width))
    throw InvalidInput("ComplexGrid: half width must be >= 2 so the unit disc is interior");
  if (values_.size() != static_cast<std::size_t>(n) * n) throw InvalidInput("ComplexGrid: value count mismatch");
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidInput("ComplexGrid: non-finite value");
}

double ComplexGrid::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

BeltramiField::BeltramiField(ComplexGrid m) : mu(std::move(m)), k(mu.max_abs()) {
  for (int j = 0; j < mu.size(); ++j)
    for (int i = 0; i < mu.size(); ++i)
      if (std::abs(mu.point(i, j)) > 1.0 + 1e-12 && mu.at(i, j) != cplx(0.0))
        throw InvalidInput("BeltramiField: coefficient must vanish outside the unit disc");
}

std::pair<ComplexGrid, ComplexGrid> wirtinger(const ComplexGrid& f) {
  const int n = f.size();
  const double h = f.spacing();
  std::vector<cplx> fx(f.values().size()), fy(f.values().size());
  for (int j = 0; j < n; ++j) derivative_line(&f.values()[static_cast<std::size_t>(j) * n], 1, n, h, &fx[static_cast<std::size_t>(j) * n]);
  for (int i = 0; i < n; ++i) derivative_line(&f.values()[i], n, n, h, &fy[i]);
  std::vector<cplx> fz(fx.size()), fzb(fx.size());
  const cplx I(0, 1);
  for (std::size_t k = 0; k < fx.size(); ++k) {
    fz[k] = 0.5 * (fx[k] - I * fy[k]);
    fzb[k] = 0.5 * (fx[k] + I * fy[k]);
  }
  return {ComplexGrid(n, f.half_width(), std::move(fz)), ComplexGrid(n, f.half_width(), std::move(fzb))};
}

cplx beltrami_coefficient(const matcore::InducedMetric& m, double tol) {
  const Mat2& g = m.g;
  if (!g.allFinite()) throw InvalidMetric("metric has non-finite entries");
  if (std::abs(g(0, 1) - g(1, 0)) > tol * (1.0 + g.norm())) throw InvalidMetric("metric is not symmetric");
  const double tr = g(0, 0) + g(1, 1);
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  if (0.5 * tr - disc < 1.0 - tol * (1.0 + tr)) throw InvalidMetric("metric is not bounded below by the identity");
  const double E = m.E(), F = 0.5 * (g(0, 1) + g(1, 0)), G = m.G();
  return cplx(E - G, 2.0 * F) / (E + G + 2.0 * std::sqrt(std::max(0.0, E * G - F * F)));
}

double dilatation_bound(double lipschitz) {
  const double s = std::sqrt(1.0 + lipschitz * lipschitz);
  return (s - 1.0) / (s + 1.0);
}

BeltramiField sample_field(const Mesh& mesh, const std::vector<cplx>& nodal_mu, int n, double half_width) {
  if (nodal_mu.size() != static_cast<std::size_t>(mesh.num_nodes()))
    throw InvalidInput("sample_field: one coefficient per node required");
  const graphsolve::PointLocator loc(mesh);
  ComplexGrid g(n, half_width);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const cplx z = g.point(i, j);
      if (std::abs(z) > 1.0) continue;
      const auto l = loc.locate_nearest(Vec2(z.real(), z.imag()));
      const auto& tri = mesh.triangle(l.triangle);
      g.at(i, j) = l.bary(0) * nodal_mu[tri[0]] + l.bary(1) * nodal_mu[tri[1]] + l.bary(2) * nodal_mu[tri[2]];
    }
  }
  return BeltramiField(std::move(g));
}

double BeltramiSolution::contraction() const {
  if (contraction_history.empty()) return 0.0;
  double s = 0.0;
  for (double c : contraction_history) s += std::log(c);
  return std::exp(s / contraction_history.size());
}

BeltramiSolution solve_beltrami(const BeltramiField& field, double tol, int max_iter) {
  if (!(field.k < 1.0)) throw InvalidInput("solve_beltrami: sup |mu| must be < 1");
  if (!(tol > 0) || max_iter < 0) throw InvalidInput("solve_beltrami: need tol > 0 and max_iter >= 0");
  const ComplexGrid& mu = field.mu;
  const int n = mu.size();
  const std::size_t total = static_cast<std::size_t>(n) * n;
  const double w = M_PI / mu.half_width();

  std::vector<cplx> beurling(total), cauchy(total);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const cplx k(w * (i < n / 2 ? i : i - n), w * (j < n / 2 ? j : j - n));
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      if (i == 0 && j == 0) continue;
      beurling[idx] = std::conj(k) / k;
      cauchy[idx] = 1.0 / (cplx(0, 0.5) * k);
    }
  }

  Fft2 fft(n);
  const auto& m = mu.values();
  std::vector<cplx> h = m, q(total), sq(total), next(total);
  BeltramiSolution sol{ComplexGrid(n, mu.half_width()), 0, {}, {}, 0.0};
  cplx beta;
  for (;;) {
    beta = std::accumulate(h.begin(), h.end(), cplx(0.0)) / static_cast<double>(total);
    for (std::size_t k = 0; k < total; ++k) q[k] = h[k] - beta;
    fft.multiply(q, beurling, sq);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      const cplx fz = 1.0 + sq[k];
      next[k] = m[k] * fz;
      num += std::norm(beta + q[k] - next[k]);
      den += std::norm(fz);
    }
    const double r = std::sqrt(num / den);
    if (!sol.residual_history.empty()) sol.contraction_history.push_back(r / sol.residual_history.back());
    sol.residual_history.push_back(r);
    if (r <= tol) break;
    if (sol.iterations >= max_iter)
      throw ConvergenceError("solve_beltrami: no convergence in " + std::to_string(max_iter) + " iterations", r,
                             sol.residual_history);
    h.swap(next);
    ++sol.iterations;
  }

  fft.multiply(q, cauchy, sq);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const cplx z = mu.point(i, j);
      sol.phi.at(i, j) = z + beta * std::conj(z) + sq[static_cast<std::size_t>(j) * n + i];
    }
  }
  sol.far_field = beta;
  return sol;
}

PlanarMap grid_to_planar_map(const ComplexGrid& phi) {
  const int n = phi.size();
  const double L = phi.half_width();
  auto mesh = std::make_shared<const Mesh>(Mesh::square(Vec2(-L, -L), (n - 1) * phi.spacing(), n - 1));
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n) * n, 2);
  for (std::size_t k = 0; k < phi.values().size(); ++k) v.row(k) << phi.values()[k].real(), phi.values()[k].imag();
  return PlanarMap(std::move(mesh), std::move(v));
}

cplx interpolate_grid(const ComplexGrid& g, const Vec2& p) {
  const int n = g.size();
  const double u = (p.x() + g.half_width()) / g.spacing();
  const double v = (p.y() + g.half_width()) / g.spacing();
  const double fu = std::floor(u), fv = std::floor(v);
  const double s = u - fu, t = v - fv;
  auto wrap = [n](long k) { return static_cast<int>(((k % n) + n) % n); };
  const int i0 = wrap(static_cast<long>(fu)), i1 = wrap(static_cast<long>(fu) + 1);
  const int j0 = wrap(static_cast<long>(fv)), j1 = wrap(static_cast<long>(fv) + 1);
  return (1 - s) * (1 - t) * g.at(i0, j0) + s * (1 - t) * g.at(i1, j0) + (1 - s) * t * g.at(i0, j1) +
         s * t * g.at(i1, j1);
}

PlanarMap image_inverse(const PlanarMap& phi) {
  auto pos = image_positions(phi);
  auto image = std::make_shared<const Mesh>(std::move(pos), phi.mesh->triangles(), phi.mesh->boundary());
  Eigen::MatrixXd x(phi.mesh->num_nodes(), 2);
  for (int i = 0; i < phi.mesh->num_nodes(); ++i) x.row(i) = phi.mesh->node(i).transpose();
  return PlanarMap(std::move(image), std::move(x));
}

std::vector<InverseSample> invert_map(const PlanarMap& phi, const std::vector<Vec2>& targets) {
  const graphsolve::PointLocator loc(image_positions(phi), phi.mesh->triangles());
  std::vector<InverseSample> out;
  out.reserve(targets.size());
  for (const Vec2& y : targets) {
    const auto l = loc.locate(y);
    if (!l) throw OutOfDomain("invert_map: target outside the image of the map");
    const auto& tri = phi.mesh->triangle(l->triangle);
    InverseSample s;
    // phi is affine on the cell, so the Newton iteration from any start converges in one
    // step to the barycentric combination of the cell's pre-image corners.
    s.x = l->bary(0) * phi.mesh->node(tri[0]) + l->bary(1) * phi.mesh->node(tri[1]) + l->bary(2) * phi.mesh->node(tri[2]);
    s.jacobian = Mat2(phi.gradient(l->triangle)).inverse();
    out.push_back(s);
  }
  return out;
}

DiscreteMap GridMap::to_mesh_map() const {
  std::vector<int> slot(static_cast<std::size_t>(nx) * ny, -1);
  std::vector<std::array<int, 3>> lattice_tris;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      if (!(inside(i, j) && inside(i + 1, j) && inside(i, j + 1) && inside(i + 1, j + 1))) continue;
      lattice_tris.push_back({index(i, j), index(i + 1, j), index(i + 1, j + 1)});
      lattice_tris.push_back({index(i, j), index(i + 1, j + 1), index(i, j + 1)});
    }
  }
  if (lattice_tris.empty()) throw InvalidInput("GridMap: no complete cells");
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : lattice_tris)
    for (int k = 0; k < 3; ++k) ++edges[std::minmax(t[k], t[(k + 1) % 3])];
  std::vector<Vec2> nodes;
  std::vector<int> lattice_of;
  for (const auto& t : lattice_tris)
    for (int k : t)
      if (slot[k] < 0) {
        slot[k] = static_cast<int>(nodes.size());
        nodes.push_back(point(k % nx, k / nx));
        lattice_of.push_back(k);
      }
  std::vector<bool> boundary(nodes.size(), false);
  for (const auto& [e, c] : edges)
    if (c == 1) boundary[slot[e.first]] = boundary[slot[e.second]] = true;
  std::vector<graphsolve::Triangle> tris;
  for (const auto& t : lattice_tris) tris.push_back({slot[t[0]], slot[t[1]], slot[t[2]]});
  Eigen::MatrixXd v(nodes.size(), values.cols());
  for (std::size_t k = 0; k < nodes.size(); ++k) v.row(k) = values.row(lattice_of[k]);
  return DiscreteMap(std::make_shared<const Mesh>(std::move(nodes), std::move(tris), std::move(boundary)), std::move(v));
}

GridMap resample(const DiscreteMap& v, double spacing) {
  if (!(spacing > 0)) throw InvalidInput("resample: spacing must be positive");
  const Mesh& mesh = *v.mesh;
  Vec2 lo = mesh.node(0), hi = mesh.node(0);
  for (const auto& p : mesh.nodes()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  GridMap g;
  g.spacing = spacing;
  g.origin = Vec2(std::floor(lo.x() / spacing), std::floor(lo.y() / spacing)) * spacing;
  g.nx = static_cast<int>(std::floor((hi.x() - g.origin.x()) / spacing)) + 2;
  g.ny = static_cast<int>(std::floor((hi.y() - g.origin.y()) / spacing)) + 2;
  g.mask.assign(static_cast<std::size_t>(g.nx) * g.ny, false);
  g.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.nx) * g.ny, v.n());
  const graphsolve::PointLocator loc(mesh);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (auto l = loc.locate(g.point(i, j))) {
        g.mask[g.index(i, j)] = true;
        g.values.row(g.index(i, j)) = graphsolve::interpolate(v.values, mesh.triangles(), *l).transpose();
      }
    }
  }
  return g;
}

Factorization factorize(const DiscreteMap& u, const FactorizeConfig& cfg) {
  const Mesh& mesh = *u.mesh;
  const auto grads = u.nodal_gradients();
  FactorizeReport rep;
  if (cfg.lipschitz > 0) {
    rep.lipschitz = cfg.lipschitz;
  } else {
    for (int t = 0; t < mesh.num_triangles(); ++t) rep.lipschitz = std::max(rep.lipschitz, u.gradient(t).norm());
  }
  rep.dilatation_bound = dilatation_bound(rep.lipschitz);

  std::vector<cplx> nodal_mu(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) nodal_mu[i] = beltrami_coefficient(matcore::metric(grads[i]));
  BeltramiField field = sample_field(mesh, nodal_mu, cfg.grid, cfg.half_width);
  rep.sup_mu = field.k;
  BeltramiSolution sol = solve_beltrami(field, cfg.tol, cfg.max_iter);
  rep.beltrami_iterations = sol.iterations;
  rep.beltrami_residual = sol.residual();
  rep.beltrami_contraction = sol.contraction();
  rep.far_field = std::abs(sol.far_field);

  const auto [pz, pzb] = wirtinger(sol.phi);
  rep.min_det_dphi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < pz.size(); ++j)
    for (int i = 0; i < pz.size(); ++i)
      if (std::abs(pz.point(i, j)) <= 1.0)
        rep.min_det_dphi = std::min(rep.min_det_dphi, std::norm(pz.at(i, j)) - std::norm(pzb.at(i, j)));

  Eigen::MatrixXd phi_nodes(mesh.num_nodes(), 2);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const cplx p = interpolate_grid(sol.phi, mesh.node(i));
    phi_nodes.row(i) << p.real(), p.imag();
  }
  const PlanarMap phi_on_u(u.mesh, std::move(phi_nodes));

  rep.rho_min = std::numeric_limits<double>::infinity();
  rep.rho_max = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat2 dphi = phi_on_u.gradient(t);
    const Mat2 g = matcore::metric(u.gradient(t)).g;
    const Mat2 pullback = dphi.transpose() * dphi;
    const double rho = std::sqrt(g.determinant()) / dphi.determinant();
    rep.rho_min = std::min(rep.rho_min, rho);
    rep.rho_max = std::max(rep.rho_max, rho);
    rep.metric_deviation = std::max(rep.metric_deviation, (g / rho - pullback).norm() / pullback.norm());
  }

  PlanarMap inverse = image_inverse(phi_on_u);
  DiscreteMap v_mesh(inverse.mesh, u.values);
  GridMap v = resample(v_mesh, cfg.resample_spacing);
  rep.harmonic_residual = harmonic_residual(v);
  rep.resampled_points = static_cast<int>(std::count(v.mask.begin(), v.mask.end(), true));
  return {std::move(field), std::move(sol), std::move(inverse), std::move(v_mesh), std::move(v), rep};
}

double harmonic_residual(const GridMap& v) {
  const double h = v.spacing;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(v.values.cols());
  for (int j = 0; j < v.ny; ++j) {
    for (int i = 0; i < v.nx; ++i) {
      if (!(v.inside(i, j) && v.inside(i - 1, j) && v.inside(i + 1, j) && v.inside(i, j - 1) && v.inside(i, j + 1)))
        continue;
      const Eigen::RowVectorXd lap = (v.values.row(v.index(i + 1, j)) + v.values.row(v.index(i - 1, j)) +
                                      v.values.row(v.index(i, j + 1)) + v.values.row(v.index(i, j - 1)) -
                                      4.0 * v.values.row(v.index(i, j))) /
                                     (h * h);
      sums += lap.transpose().cwiseAbs2() * (h * h);
    }
  }
  return sums.cwiseSqrt().sum();
}

double harmonic_residual(const DiscreteMap& v) {
  const Mesh& mesh = *v.mesh;
  const Eigen::MatrixXd r = stiffness_times(mesh, v.values);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k : mesh.triangle(t)) mass(k) += mesh.area(t) / 3.0;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(v.n());
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (!mesh.is_boundary(i)) sums += r.row(i).transpose().cwiseAbs2() / mass(i);
  return sums.cwiseSqrt().sum();
}

int RegionLabels::count(Region r) const { return static_cast<int>(std::count(labels.begin(), labels.end(), r)); }

RegionLabels classify_regions(const DiscreteMap& v, double tol_grad, double tol_minor) {
  if (!(tol_grad >= 0) || !(tol_minor >= 0)) throw InvalidInput("classify_regions: tolerances must be >= 0");
  RegionLabels out;
  out.tol_grad = tol_grad;
  out.tol_minor = tol_minor;
  for (const auto& g : v.nodal_gradients()) {
    if (g.norm() <= tol_grad)
      out.labels.push_back(Region::kE1);
    else if (matcore::max_abs_minor(g) <= tol_minor)
      out.labels.push_back(Region::kZset);
    else
      out.labels.push_back(Region::kOset);
  }
  return out;
}

double outer_residual(const DiscreteMap& u, ResidualMesh where) {
  return where == ResidualMesh::kRefined ? graphsolve::outer_variation_residual_refined(u)
                                         : graphsolve::outer_variation_residual(u);
}

double inner_residual(const PlanarMap& w, const Eigen::MatrixXd& psi, ResidualMesh where) {
  if (w.n() != 2) throw InvalidInput("inner_residual: w must have two components");
  if (psi.rows() != w.values.rows()) throw InvalidInput("inner_residual: psi must live on the nodes of w");
  Eigen::MatrixXd stacked(w.values.rows(), 2 + psi.cols());
  stacked << w.values, psi;
  const DiscreteMap wp(w.mesh, std::move(stacked));
  return where == ResidualMesh::kRefined ? graphsolve::inner_variation_residual_refined(wp)
                                         : graphsolve::inner_variation_residual(wp);
}

InversionPipeline inversion_pipeline(const DiscreteMap& u, const Vec2& center, double radius) {
  if (u.n() < 2) throw InvalidInput("inversion_pipeline: need at least two components");
  const Mesh& mesh = *u.mesh;
  std::vector<bool> keep(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Vec2 c = (mesh.node(tri[0]) + mesh.node(tri[1]) + mesh.node(tri[2])) / 3.0;
    keep[t] = (c - center).norm() < radius;
  }
  std::vector<int> node_map;
  auto sub = std::make_shared<const Mesh>(mesh.submesh(keep, &node_map));
  Eigen::MatrixXd f(sub->num_nodes(), 2), psi(sub->num_nodes(), u.n() - 2);
  for (int i = 0; i < sub->num_nodes(); ++i) {
    f.row(i) = u.values.row(node_map[i]).head(2);
    psi.row(i) = u.values.row(node_map[i]).tail(u.n() - 2);
  }
  return {image_inverse(PlanarMap(std::move(sub), std::move(f))), std::move(psi)};
}

}  // namespace minsurf::beltrami

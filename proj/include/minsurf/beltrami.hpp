#pragma once

#include <complex>
#include <vector>

#include "minsurf/graphsolve.hpp"

namespace minsurf::beltrami {

using graphsolve::DiscreteMap;
using graphsolve::Mesh;
using graphsolve::MeshPtr;
using graphsolve::Vec2;
using matcore::Mat2;
using cplx = std::complex<double>;

/// N x N complex samples of the periodic box [-L, L)^2. Sample (i, j) sits at
/// z = (-L + i h) + i (-L + j h) with h = 2L/N and is stored at index j * N + i.
class ComplexGrid {
 public:
  ComplexGrid(int n, double half_width);
  ComplexGrid(int n, double half_width, std::vector<cplx> values);

  template <class Fn>
  static ComplexGrid sample(int n, double half_width, Fn&& fn) {
    ComplexGrid g(n, half_width);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g.at(i, j) = fn(g.point(i, j));
    return g;
  }

  int size() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return 2.0 * half_width_ / n_; }
  cplx point(int i, int j) const { return {-half_width_ + i * spacing(), -half_width_ + j * spacing()}; }
  cplx& at(int i, int j) { return values_[static_cast<std::size_t>(j) * n_ + i]; }
  const cplx& at(int i, int j) const { return values_[static_cast<std::size_t>(j) * n_ + i]; }
  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }
  double max_abs() const;

 private:
  int n_;
  double half_width_;
  std::vector<cplx> values_;
};

/// Complex dilatation sampled on a grid. Construction checks that mu vanishes outside the
/// closed unit disc; k is the sampled sup |mu| and may be >= 1 (solve_beltrami rejects it).
struct BeltramiField {
  explicit BeltramiField(ComplexGrid mu);
  ComplexGrid mu;
  double k;
};

/// f_z = (f_x - i f_y)/2 and f_zbar = (f_x + i f_y)/2 by fourth-order finite differences,
/// one-sided near the box edges. Exact for polynomials of degree <= 4.
std::pair<ComplexGrid, ComplexGrid> wirtinger(const ComplexGrid& f);

/// (E - G + 2iF) / (E + G + 2 sqrt(EG - F^2)). Throws InvalidMetric unless g is symmetric
/// with both eigenvalues >= 1 - tol.
cplx beltrami_coefficient(const matcore::InducedMetric& g, double tol = 1e-9);

/// Upper bound on |mu| over all metrics id + Z^T Z with |Z| <= lipschitz.
double dilatation_bound(double lipschitz);

/// Nodal coefficients P1-interpolated onto the grid inside the unit disc and zero outside.
/// Grid points inside the disc but outside the (inscribed) mesh take the nearest cell.
BeltramiField sample_field(const Mesh& mesh, const std::vector<cplx>& nodal_mu, int n, double half_width);

struct BeltramiSolution {
  ComplexGrid phi;
  int iterations = 0;
  /// Relative residual |phi_zbar - mu phi_z|_2 / |phi_z|_2 before each update, spectrally.
  std::vector<double> residual_history;
  /// Ratios of successive residuals.
  std::vector<double> contraction_history;
  /// Coefficient beta of the affine part z + beta zbar; zero for exact normalization at infinity.
  cplx far_field = 0.0;

  double residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
  /// Geometric mean of the contraction history.
  double contraction() const;
};

/// Solves phi_zbar = mu phi_z with phi = z + beta zbar + p, p periodic on the box, by the
/// fixed point h <- mu (1 + S(h - mean h)) where S is the Beurling transform (Fourier
/// symbol conj(k)/k). Throws InvalidInput if k >= 1, ConvergenceError after max_iter.
BeltramiSolution solve_beltrami(const BeltramiField& mu, double tol = 1e-10, int max_iter = 200);

/// Planar maps are P1 maps with two components.
using PlanarMap = DiscreteMap;

/// P1 map on the triangulated grid nodes (the (N-1)^2 cells of the sample lattice).
PlanarMap grid_to_planar_map(const ComplexGrid& phi);
/// Bilinear interpolation of a grid field (periodic wrap-around).
cplx interpolate_grid(const ComplexGrid& g, const Vec2& p);

/// The inverse of an orientation-preserving P1 map as a P1 map on the image mesh: nodes
/// phi(x_i), values x_i. Throws NotInjective if an image triangle is not positively oriented.
PlanarMap image_inverse(const PlanarMap& phi);

struct InverseSample {
  Vec2 x;
  /// D(phi^{-1})(y) = (D phi(x))^{-1} on the containing cell.
  Mat2 jacobian;
};

/// phi^{-1}(y) for each target by point location among the image cells followed by the
/// exact affine inversion on that cell. Throws NotInjective or OutOfDomain.
std::vector<InverseSample> invert_map(const PlanarMap& phi, const std::vector<Vec2>& targets);

/// Values on a regular grid; rows of `values` follow index j * nx + i. Points outside the
/// represented domain have mask false and unspecified values.
struct GridMap {
  Vec2 origin;
  double spacing = 1.0;
  int nx = 0, ny = 0;
  std::vector<bool> mask;
  Eigen::MatrixXd values;

  Vec2 point(int i, int j) const { return origin + spacing * Vec2(i, j); }
  int index(int i, int j) const { return j * nx + i; }
  bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny && mask[index(i, j)]; }
  /// P1 map on the cells whose four corners are all masked.
  DiscreteMap to_mesh_map() const;
};

/// Samples a P1 map on the lattice origin + spacing * (i, j) covering its domain's bounding box.
GridMap resample(const DiscreteMap& v, double spacing);

struct FactorizeConfig {
  int grid = 256;
  double half_width = 4.0;
  double tol = 1e-10;
  int max_iter = 200;
  /// Lattice spacing for v; fixed independently of the input mesh so that residuals
  /// are comparable across refinements.
  double resample_spacing = 1.0 / 16;
  /// Gradient bound used for the a priori bound on |mu|; <= 0 estimates it from Du.
  double lipschitz = 0.0;
};

struct FactorizeReport {
  double lipschitz = 0.0;
  double dilatation_bound = 0.0;
  double sup_mu = 0.0;
  int beltrami_iterations = 0;
  double beltrami_residual = 0.0;
  double beltrami_contraction = 0.0;
  double far_field = 0.0;
  double min_det_dphi = 0.0;
  /// rho = sqrt(det g) / det(D phi) per cell of the input mesh.
  double rho_min = 0.0, rho_max = 0.0;
  /// max over cells of |g / rho - D phi^T D phi| / |D phi^T D phi|.
  double metric_deviation = 0.0;
  double harmonic_residual = 0.0;
  int resampled_points = 0;
};

struct Factorization {
  BeltramiField mu;
  BeltramiSolution phi;
  /// phi^{-1} on the image of the input mesh.
  PlanarMap phi_inverse;
  /// u o phi^{-1} as a P1 map on the image mesh, and its lattice resample.
  DiscreteMap v_mesh;
  GridMap v;
  FactorizeReport report;
};

/// u = v o phi with phi quasiconformal solving the Beltrami equation of the induced metric
/// of u (area-averaged nodal gradients) and v = u o phi^{-1}. The input mesh should cover
/// the unit disc.
Factorization factorize(const DiscreteMap& u, const FactorizeConfig& config = {});

/// Sum over components of the discrete L2 norm of the five-point Laplacian at lattice
/// points whose four neighbours are masked.
double harmonic_residual(const GridMap& v);
/// Mesh version: lumped-mass L2 norm of the P1 stiffness residual at interior nodes.
double harmonic_residual(const DiscreteMap& v);

enum class Region { kE1, kZset, kOset };

struct RegionLabels {
  std::vector<Region> labels;
  double tol_grad = 0.0;
  double tol_minor = 0.0;
  int count(Region r) const;
};

/// Labels nodes by the area-averaged nodal gradient: E1 if the Frobenius norm |Dv| <= tol_grad,
/// else Zset if every 2x2 minor is <= tol_minor in absolute value, else Oset.
RegionLabels classify_regions(const DiscreteMap& v, double tol_grad, double tol_minor);

enum class ResidualMesh { kOwn, kRefined };

/// Dual norm of the outer variation; kRefined measures it after exact prolongation.
double outer_residual(const DiscreteMap& u, ResidualMesh where = ResidualMesh::kRefined);

/// Dual norm of the weak residual of div B(Dw | Dpsi). psi holds nodal values on w's mesh
/// (n - 2 columns, possibly none).
double inner_residual(const PlanarMap& w, const Eigen::MatrixXd& psi, ResidualMesh where = ResidualMesh::kRefined);

struct InversionPipeline {
  PlanarMap w;
  Eigen::MatrixXd psi;
};

/// Restricts u to the triangles with centroid in the ball B_radius(center), takes
/// f = (u_1, u_2) there, and returns w = f^{-1} on the image mesh with psi = (u_3..u_n) o w.
InversionPipeline inversion_pipeline(const DiscreteMap& u, const Vec2& center, double radius);

}  // namespace minsurf::beltrami

#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Dense>

#include "minsurf/report.hpp"

/// Small-matrix algebra of the graph area integrand A(Z) = sqrt(det(id + Z^T Z)) for
/// Z in R^{n x 2}: its gradient, the inner stress B(Z), and the supporting 2x2 tools.
namespace minsurf::matcore {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// n x 2 gradient of a map from a planar domain into R^n. Columns are the partial
/// derivatives, rows the components.
using GradientMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// 2x2 symmetric unimodular matrix B(Z) = sqrt(det g) g^{-1}.
using InnerStress = Mat2;

/// Z written as (X | Y): X the first two rows, Y the remaining n - 2.
struct BlockPair {
  Mat2 top;
  GradientMatrix bottom;

  BlockPair() : top(Mat2::Zero()), bottom(0, 2) {}
  BlockPair(Mat2 x, GradientMatrix y) : top(std::move(x)), bottom(std::move(y)) {}

  int n() const { return 2 + static_cast<int>(bottom.rows()); }
  GradientMatrix stacked() const;
};

/// g = id + Z^T Z.
struct InducedMetric {
  Mat2 g;

  double E() const { return g(0, 0); }
  double F() const { return g(0, 1); }
  double G() const { return g(1, 1); }
};

struct Svd2Result {
  Mat2 U;
  double a = 0.0;  ///< largest singular value
  double b = 0.0;  ///< smallest singular value
  Mat2 V;

  Mat2 reconstruct() const;
};

/// Absolute-plus-relative tolerance: |err| <= abs + rel * scale.
struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-9;

  bool accepts(double err, double scale) const { return err <= abs + rel * scale; }
};

inline constexpr double kInfiniteDistortion = std::numeric_limits<double>::infinity();

/// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what);

/// Sum over row pairs a < b of det(Z^{ab})^2; equals det(Z^T Z) by Cauchy-Binet.
double minor_square_sum(const GradientMatrix& Z);
/// max over a < b of |det(Z^{ab})|, 0 when n < 2.
double max_abs_minor(const GradientMatrix& Z);

double area(const GradientMatrix& Z);
GradientMatrix area_gradient(const GradientMatrix& Z);
InnerStress inner_stress(const GradientMatrix& Z);
InnerStress inner_stress_blocks(const BlockPair& p);
Mat2 cof2(const Mat2& M);
InducedMetric metric(const GradientMatrix& Z);

/// Closed-form 2x2 SVD, M = U diag(a, b) V^T with a >= b >= 0 and det U = +1.
Svd2Result svd2(const Mat2& M);

/// |M|^2 / det M, or +inf when det M <= 0. Equals 2 exactly on conformal matrices.
double qc_distortion(const Mat2& M);

/// Second directional derivative D^2 A(Z)[W, W] by second central differences at steps
/// h and h/2 combined by Richardson extrapolation. W must have unit Frobenius norm.
double area_hessian_fd(const GradientMatrix& Z, const GradientMatrix& W, double h = 1e-3);

/// Random-sample check of the algebraic identities satisfied by A, DA and B:
/// orthogonal invariance and equivariance, symmetry/positivity/unimodularity of B, the
/// block inversion and metric-reduction formulas, B = sqrt(det g) g^{-1}, DA = Z B, the
/// rank-one form of A and the cofactor identity. Every deviation is measured as
/// |lhs - rhs| / (1 + max(|lhs|, |rhs|)).
ScanReport verify_identities(int n, std::size_t samples, std::uint64_t seed, double tol,
                             int threads = 1);

}  // namespace minsurf::matcore

#include "minsurf/matcore.hpp"

#include <array>
#include <cmath>
#include <string>

#include "minsurf/errors.hpp"
#include "minsurf/sampling.hpp"

namespace minsurf::matcore {

GradientMatrix BlockPair::stacked() const {
  GradientMatrix z(n(), 2);
  z.topRows(2) = top;
  if (bottom.rows() > 0) z.bottomRows(bottom.rows()) = bottom;
  return z;
}

Mat2 Svd2Result::reconstruct() const { return U * Eigen::Vector2d(a, b).asDiagonal() * V.transpose(); }

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

double minor_square_sum(const GradientMatrix& Z) {
  double s = 0.0;
  for (Eigen::Index a = 0; a < Z.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < Z.rows(); ++b) {
      const double d = Z(a, 0) * Z(b, 1) - Z(a, 1) * Z(b, 0);
      s += d * d;
    }
  }
  return s;
}

double max_abs_minor(const GradientMatrix& Z) {
  double m = 0.0;
  for (Eigen::Index a = 0; a < Z.rows(); ++a)
    for (Eigen::Index b = a + 1; b < Z.rows(); ++b)
      m = std::max(m, std::abs(Z(a, 0) * Z(b, 1) - Z(a, 1) * Z(b, 0)));
  return m;
}

double area(const GradientMatrix& Z) {
  require_finite(Z, "area");
  return std::sqrt(1.0 + Z.squaredNorm() + minor_square_sum(Z));
}

GradientMatrix area_gradient(const GradientMatrix& Z) {
  require_finite(Z, "area_gradient");
  // Z + sum_{a<b} det(Z^{ab}) C_ab(Z), where C_ab carries cof(Z^{ab})^T in rows a, b.
  GradientMatrix num = Z;
  for (Eigen::Index a = 0; a < Z.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < Z.rows(); ++b) {
      const double d = Z(a, 0) * Z(b, 1) - Z(a, 1) * Z(b, 0);
      num(a, 0) += d * Z(b, 1);
      num(a, 1) -= d * Z(b, 0);
      num(b, 0) -= d * Z(a, 1);
      num(b, 1) += d * Z(a, 0);
    }
  }
  return num / std::sqrt(1.0 + Z.squaredNorm() + minor_square_sum(Z));
}

InnerStress inner_stress(const GradientMatrix& Z) {
  require_finite(Z, "inner_stress");
  const double a = std::sqrt(1.0 + Z.squaredNorm() + minor_square_sum(Z));
  const double c11 = Z.col(0).squaredNorm();
  const double c22 = Z.col(1).squaredNorm();
  const double c12 = Z.col(0).dot(Z.col(1));
  InnerStress B;
  B << (1.0 + c22) / a, -c12 / a, -c12 / a, (1.0 + c11) / a;
  return B;
}

InnerStress inner_stress_blocks(const BlockPair& p) {
  if (p.bottom.cols() != 2) throw InvalidInput("inner_stress_blocks: bottom block must have 2 columns");
  return inner_stress(p.stacked());
}

Mat2 cof2(const Mat2& M) {
  Mat2 c;
  c << M(1, 1), -M(0, 1), -M(1, 0), M(0, 0);
  return c;
}

InducedMetric metric(const GradientMatrix& Z) {
  require_finite(Z, "metric");
  InducedMetric m;
  m.g = Mat2::Identity() + Z.transpose() * Z;
  m.g(1, 0) = m.g(0, 1);
  return m;
}

Svd2Result svd2(const Mat2& M) {
  // M = Q R(alpha) + R R(beta) D with D = diag(1, -1); then
  // M = R(phi) diag(Q + R, Q - R) R(theta), phi = (alpha + beta)/2, theta = (alpha - beta)/2.
  const double e = 0.5 * (M(0, 0) + M(1, 1));
  const double f = 0.5 * (M(0, 0) - M(1, 1));
  const double g = 0.5 * (M(1, 0) + M(0, 1));
  const double h = 0.5 * (M(1, 0) - M(0, 1));
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  const double alpha = std::atan2(h, e);
  const double beta = std::atan2(g, f);
  const double phi = 0.5 * (alpha + beta);
  const double theta = 0.5 * (alpha - beta);

  Svd2Result out;
  out.U = rotation(phi);
  out.a = q + r;
  const double second = q - r;
  out.V = rotation(-theta);
  if (second < 0.0) {
    out.b = -second;
    out.V.col(1) = -out.V.col(1);
  } else {
    out.b = second;
  }
  return out;
}

double qc_distortion(const Mat2& M) {
  const double det = M.determinant();
  if (!(det > 0.0)) return kInfiniteDistortion;
  return M.squaredNorm() / det;
}

double area_hessian_fd(const GradientMatrix& Z, const GradientMatrix& W, double h) {
  require_finite(Z, "area_hessian_fd");
  require_finite(W, "area_hessian_fd");
  if (W.rows() != Z.rows()) throw InvalidInput("area_hessian_fd: shape mismatch");
  if (std::abs(W.norm() - 1.0) > 1e-9) throw InvalidInput("area_hessian_fd: direction must have unit norm");
  if (!(h > 0.0) || h > 1e-3) throw InvalidInput("area_hessian_fd: step must lie in (0, 1e-3]");
  const double a0 = area(Z);
  auto second = [&](double s) {
    const GradientMatrix zp = Z + s * W;
    const GradientMatrix zm = Z - s * W;
    return (area(zp) - 2.0 * a0 + area(zm)) / (s * s);
  };
  const double coarse = second(h);
  const double fine = second(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

namespace {

enum Check : int {
  kRowInvariance,
  kColumnCovariance,
  kGradientEquivariance,
  kSymmetric,
  kPositiveDiagonal,
  kUnimodular,
  kInverseBlock,
  kMetricReduction,
  kMetricForm,
  kGradientFactorization,
  kRankOneArea,
  kCofactor,
  kNumChecks
};

constexpr std::array<const char*, kNumChecks> kCheckNames = {
    "B_row_invariance",   "B_column_covariance", "DA_equivariance",  "B_symmetric",
    "B_positive_diagonal", "B_unimodular",       "B_inverse_block",  "B_metric_reduction",
    "B_metric_form",      "DA_factorization",    "area_rank_one",    "cofactor_identity"};

double deviation(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
  return (lhs - rhs).norm() / (1.0 + std::max(lhs.norm(), rhs.norm()));
}

Mat2 sqrt_spd(const Mat2& A) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(A);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

struct IdentityPartial {
  std::array<double, kNumChecks> max_dev{};
  std::array<std::size_t, kNumChecks> evaluated{};
  std::size_t excluded = 0;
  std::vector<Violation> violations;
};

GradientMatrix random_gradient(int n, Rng& rng, bool& rank_one) {
  const double range = log_uniform(rng, 0.1, 10.0);
  rank_one = uniform(rng, 0.0, 1.0) < 0.25;
  GradientMatrix z(n, 2);
  if (rank_one) {
    Eigen::VectorXd a(n);
    Vec2 b;
    for (int i = 0; i < n; ++i) a(i) = uniform(rng, -range, range);
    b << uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0);
    z = a * b.transpose();
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) z(i, j) = uniform(rng, -range, range);
  }
  return z;
}

}  // namespace

ScanReport verify_identities(int n, std::size_t samples, std::uint64_t seed, double tol, int threads) {
  if (n < 2) throw InvalidInput("verify_identities: n must be >= 2");
  ScanReport report;
  report.kind = "identities";
  report.seed = seed;
  report.samples = samples;
  report.config = {{"n", n}, {"samples", samples}, {"seed", seed}, {"tol", tol}};
  if (samples == 0) return report;

  auto block = [&](std::size_t begin, std::size_t end) {
    IdentityPartial part;
    auto record = [&](std::size_t idx, Check c, double dev, bool failed, const Json& inputs) {
      part.max_dev[c] = std::max(part.max_dev[c], dev);
      ++part.evaluated[c];
      if (failed) part.violations.push_back({idx, kCheckNames[c], inputs, dev, tol});
    };
    for (std::size_t idx = begin; idx < end; ++idx) {
      Rng rng = sample_rng(seed, 1, idx);
      bool rank_one = false;
      const GradientMatrix Z = random_gradient(n, rng, rank_one);
      const Eigen::MatrixXd N = random_orthogonal(n, rng);
      const Mat2 M = random_orthogonal(2, rng);
      const Json inputs = {{"Z", json_matrix(Z)}, {"N", json_matrix(N)}, {"M", json_matrix(M)}};
      auto check = [&](Check c, const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
        const double dev = deviation(lhs, rhs);
        record(idx, c, dev, !(dev <= tol), inputs);
      };

      const InnerStress B = inner_stress(Z);
      const GradientMatrix NZ = N * Z;
      const GradientMatrix ZM = Z * M;
      const GradientMatrix NZM = N * Z * M;
      check(kRowInvariance, inner_stress(NZ), B);
      check(kColumnCovariance, inner_stress(ZM), M.transpose() * B * M);
      check(kGradientEquivariance, area_gradient(NZM), N * area_gradient(Z) * M);
      check(kSymmetric, B, B.transpose());
      {
        const double lo = std::min(B(0, 0), B(1, 1));
        const double dev = lo > 0.0 ? 0.0 : 1.0 - lo;
        record(idx, kPositiveDiagonal, dev, !(lo > 0.0), inputs);
      }
      {
        const double dev = std::abs(B.determinant() - 1.0) / 2.0;
        record(idx, kUnimodular, dev, !(dev <= tol), inputs);
      }

      Mat2 X = Z.topRows(2);
      if (X.determinant() < 0.0) X.col(0) = -X.col(0);
      const GradientMatrix Y = Z.bottomRows(n - 2);
      const double detX = X.determinant();
      if (detX > 1e-8 && X.squaredNorm() <= 1e6 * detX) {
        const Mat2 Xinv = X.inverse();
        const InnerStress lhs = inner_stress_blocks({Xinv, Y});
        const InnerStress rhs = X * inner_stress_blocks({X, Y * X}) * X.transpose() / detX;
        check(kInverseBlock, lhs, rhs);
      } else {
        ++part.excluded;
      }

      {
        const Mat2 S = sqrt_spd(Mat2::Identity() + Y.transpose() * Y);
        const Mat2 Sinv = S.inverse();
        const InnerStress lhs = inner_stress_blocks({X, Y});
        const InnerStress rhs =
            S.determinant() * Sinv * inner_stress_blocks({X * Sinv, GradientMatrix::Zero(n - 2, 2)}) * Sinv;
        check(kMetricReduction, lhs, rhs);
      }

      const Mat2 g = metric(Z).g;
      check(kMetricForm, B, std::sqrt(g.determinant()) * g.inverse());
      check(kGradientFactorization, area_gradient(Z), Z * B);
      if (rank_one) {
        const double a = area(Z), b = std::sqrt(1.0 + Z.squaredNorm());
        const double dev = std::abs(a - b) / (1.0 + std::max(a, b));
        record(idx, kRankOneArea, dev, !(dev <= tol), inputs);
      }
      check(kCofactor, X * cof2(X), detX * Mat2::Identity());
    }
    return part;
  };

  IdentityPartial total;
  total = parallel_blocks(samples, threads, std::move(total), block,
                          [&](IdentityPartial& acc, IdentityPartial& p) {
                            for (int c = 0; c < kNumChecks; ++c) {
                              acc.max_dev[c] = std::max(acc.max_dev[c], p.max_dev[c]);
                              acc.evaluated[c] += p.evaluated[c];
                            }
                            acc.excluded += p.excluded;
                            for (auto& v : p.violations) report.add_violation(std::move(v));
                          });

  report.evaluated = samples;
  report.excluded = total.excluded;
  for (int c = 0; c < kNumChecks; ++c) {
    report.set(std::string("max_dev.") + kCheckNames[c], total.max_dev[c]);
    report.set(std::string("checked.") + kCheckNames[c], static_cast<double>(total.evaluated[c]));
  }
  return report;
}

}  // namespace minsurf::matcore

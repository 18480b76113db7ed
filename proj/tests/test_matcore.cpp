#include <gtest/gtest.h>

#include <cmath>

#include "minsurf/errors.hpp"
#include "minsurf/matcore.hpp"
#include "minsurf/sampling.hpp"

using namespace minsurf;
using namespace minsurf::matcore;

namespace {

GradientMatrix diag2(double a, double b) {
  GradientMatrix z(2, 2);
  z << a, 0, 0, b;
  return z;
}

GradientMatrix random_z(int n, double range, Rng& rng) {
  GradientMatrix z(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = uniform(rng, -range, range);
  return z;
}

// Oracle: A(Z) from the Gram determinant, independent of the minor expansion.
double area_from_gram(const GradientMatrix& z) {
  const Eigen::Matrix2d g = Eigen::Matrix2d::Identity() + z.transpose() * z;
  return std::sqrt(g.determinant());
}

}  // namespace

TEST(Area, ZeroIsOne) { EXPECT_DOUBLE_EQ(area(GradientMatrix::Zero(2, 2)), 1.0); }

TEST(Area, RankOneDiagonal) { EXPECT_NEAR(area(diag2(3, 0)), std::sqrt(10.0), 1e-15); }

TEST(Area, IdentityIsTwo) { EXPECT_NEAR(area(diag2(1, 1)), 2.0, 1e-15); }

TEST(Area, RejectsNonFinite) {
  GradientMatrix z = diag2(1, 2);
  z(1, 0) = std::nan("");
  EXPECT_THROW(area(z), InvalidInput);
  EXPECT_THROW(area_gradient(z), InvalidInput);
  EXPECT_THROW(inner_stress(z), InvalidInput);
}

TEST(Area, MatchesGramDeterminant) {
  Rng rng(3);
  for (int n = 1; n <= 5; ++n) {
    for (int k = 0; k < 200; ++k) {
      const GradientMatrix z = random_z(n, 3.0, rng);
      EXPECT_NEAR(area(z), area_from_gram(z), 1e-12 * area(z));
    }
  }
}

TEST(Area, RankOneEqualsSqrtOnePlusNorm) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(4, [&] { return uniform(rng, -2, 2); });
    Eigen::Vector2d b(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const GradientMatrix z = a * b.transpose();
    EXPECT_NEAR(area(z), std::sqrt(1.0 + z.squaredNorm()), 1e-13 * area(z));
  }
}

TEST(AreaGradient, ZeroAtZero) { EXPECT_EQ(area_gradient(GradientMatrix::Zero(3, 2)).norm(), 0.0); }

TEST(AreaGradient, RankOneFormula) {
  GradientMatrix z(3, 2);
  z << 1, 2, -0.5, -1, 2, 4;
  EXPECT_NEAR((area_gradient(z) - z / std::sqrt(1.0 + z.squaredNorm())).norm(), 0.0, 1e-15);
}

TEST(AreaGradient, DiagOneTwo) {
  const GradientMatrix expected = diag2(5, 4) / std::sqrt(10.0);
  EXPECT_NEAR((area_gradient(diag2(1, 2)) - expected).norm(), 0.0, 1e-15);
  EXPECT_NEAR((diag2(1, 2) * inner_stress(diag2(1, 2)) - expected).norm(), 0.0, 1e-15);
}

TEST(AreaGradient, MatchesCentralDifferences) {
  Rng rng(11);
  const double step = 1e-5;
  for (int n = 1; n <= 5; ++n) {
    for (int k = 0; k < 200; ++k) {
      GradientMatrix z = random_z(n, 1.0, rng);
      z *= uniform(rng, 0.0, 10.0) / std::max(z.norm(), 1e-300);
      const GradientMatrix g = area_gradient(z);
      GradientMatrix fd(n, 2);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
          GradientMatrix zp = z, zm = z;
          zp(i, j) += step;
          zm(i, j) -= step;
          fd(i, j) = (area(zp) - area(zm)) / (2 * step);
        }
      }
      EXPECT_LE((fd - g).norm(), 1e-6 * std::max(1.0, g.norm()));
    }
  }
}

TEST(InnerStress, Examples) {
  EXPECT_NEAR((inner_stress(GradientMatrix::Zero(2, 2)) - Mat2::Identity()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((inner_stress(diag2(1, 1)) - Mat2::Identity()).norm(), 0.0, 1e-15);
  const Mat2 b = inner_stress(diag2(1, 2));
  Mat2 expected;
  expected << 5, 0, 0, 2;
  expected /= std::sqrt(10.0);
  EXPECT_NEAR((b - expected).norm(), 0.0, 1e-15);
  EXPECT_NEAR(b.determinant(), 1.0, 1e-14);
}

TEST(InnerStress, InvariantsOnRandomInputs) {
  Rng rng(17);
  for (int n = 1; n <= 5; ++n) {
    for (int k = 0; k < 500; ++k) {
      const GradientMatrix z = random_z(n, log_uniform(rng, 0.01, 100.0), rng);
      const Mat2 b = inner_stress(z);
      EXPECT_EQ(b(0, 1), b(1, 0));
      EXPECT_GT(b(0, 0), 0.0);
      EXPECT_GT(b(1, 1), 0.0);
      EXPECT_NEAR(b.determinant(), 1.0, 1e-12 * area(z));
      const Mat2 g = metric(z).g;
      EXPECT_LE((b - std::sqrt(g.determinant()) * g.inverse()).norm(), 1e-12 * (1 + b.norm()));
    }
  }
}

TEST(InnerStressBlocks, MatchesStacked) {
  EXPECT_NEAR((inner_stress_blocks({Mat2::Identity(), GradientMatrix::Zero(1, 2)}) - Mat2::Identity()).norm(),
              0.0, 1e-15);
  Mat2 x;
  x << 1, 2, 3, 4;
  EXPECT_EQ(inner_stress_blocks({x, GradientMatrix(0, 2)}), inner_stress(x));
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const GradientMatrix z = random_z(4, 2.0, rng);
    const BlockPair p{z.topRows(2), z.bottomRows(2)};
    EXPECT_LE((inner_stress_blocks(p) - inner_stress(z)).norm(), 1e-12);
  }
}

TEST(Cof2, Examples) {
  EXPECT_EQ(cof2(Mat2::Identity()), Mat2::Identity());
  Mat2 m, c;
  m << 1, 2, 3, 4;
  c << 4, -2, -3, 1;
  EXPECT_EQ(cof2(m), c);
  Rng rng(29);
  for (int k = 0; k < 100; ++k) {
    const Mat2 r = random_z(2, 5.0, rng);
    EXPECT_LE((r * cof2(r) - r.determinant() * Mat2::Identity()).norm(), 4 * 1e-16 * r.squaredNorm());
  }
}

TEST(Metric, Examples) {
  EXPECT_EQ(metric(GradientMatrix::Zero(3, 2)).g, Mat2::Identity());
  Mat2 expected;
  expected << 2, 0, 0, 5;
  EXPECT_EQ(metric(diag2(1, 2)).g, expected);
  Rng rng(31);
  for (int k = 0; k < 200; ++k) {
    const Mat2 g = metric(random_z(3, 4.0, rng)).g;
    Eigen::SelfAdjointEigenSolver<Mat2> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-12);
  }
}

TEST(Svd2, Diagonal) {
  Mat2 m;
  m << 2, 0, 0, 1;
  const auto s = svd2(m);
  EXPECT_DOUBLE_EQ(s.a, 2.0);
  EXPECT_DOUBLE_EQ(s.b, 1.0);
  EXPECT_NEAR((s.U - Mat2::Identity()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((s.V - Mat2::Identity()).norm(), 0.0, 1e-15);
}

TEST(Svd2, RotationHasUnitSingularValues) {
  const auto s = svd2(rotation(0.7));
  EXPECT_NEAR(s.a, 1.0, 1e-15);
  EXPECT_NEAR(s.b, 1.0, 1e-15);
}

TEST(Svd2, SymmetricPositiveGivesEqualFactors) {
  const auto s = svd2(3.0 * Mat2::Identity());
  EXPECT_NEAR((s.U - s.V).norm(), 0.0, 1e-15);
  Mat2 spd;
  spd << 3, 1, 1, 2;
  const auto t = svd2(spd);
  EXPECT_NEAR((t.U - t.V).norm(), 0.0, 1e-14);
}

TEST(Svd2, RandomReconstruction) {
  Rng rng(37);
  for (int k = 0; k < 2000; ++k) {
    const Mat2 m = random_z(2, log_uniform(rng, 1e-3, 1e3), rng);
    const auto s = svd2(m);
    EXPECT_GE(s.a, s.b);
    EXPECT_GE(s.b, 0.0);
    EXPECT_NEAR(s.U.determinant(), 1.0, 1e-14);
    EXPECT_LE((s.U.transpose() * s.U - Mat2::Identity()).norm(), 1e-14);
    EXPECT_LE((s.V.transpose() * s.V - Mat2::Identity()).norm(), 1e-14);
    EXPECT_LE((s.reconstruct() - m).norm(), 1e-12 * (1 + m.norm()));
  }
}

TEST(QcDistortion, Examples) {
  EXPECT_DOUBLE_EQ(qc_distortion(Mat2::Identity()), 2.0);
  Mat2 m;
  m << 1, 0, 0, 2;
  EXPECT_DOUBLE_EQ(qc_distortion(m), 2.5);
  m << 1, 2, 2, 4;
  EXPECT_EQ(qc_distortion(m), kInfiniteDistortion);
  m << 0, 1, 1, 0;
  EXPECT_EQ(qc_distortion(m), kInfiniteDistortion);
  EXPECT_NEAR(qc_distortion(2.5 * rotation(1.1)), 2.0, 1e-14);
}

TEST(AreaHessianFd, Examples) {
  Rng rng(41);
  const GradientMatrix w = random_z(3, 1.0, rng).normalized();
  EXPECT_NEAR(area_hessian_fd(GradientMatrix::Zero(3, 2), w), 1.0, 1e-8);
  GradientMatrix e11 = GradientMatrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  // d^2/dt^2 sqrt(1 + (3 + t)^2) at t = 0 is 10^{-3/2}.
  EXPECT_NEAR(area_hessian_fd(diag2(3, 0), e11), std::pow(10.0, -1.5), 1e-8);
}

TEST(AreaHessianFd, RankOneFloor) {
  Rng rng(43);
  for (int k = 0; k < 500; ++k) {
    Eigen::VectorXd a = random_unit_vector(3, rng);
    Eigen::Vector2d b = random_unit_vector(2, rng);
    const GradientMatrix x = uniform(rng, 0.0, 4.0) * a * b.transpose();
    const GradientMatrix w = random_z(3, 1.0, rng).normalized();
    EXPECT_GE(area_hessian_fd(x, w), 1.0 / std::pow(area(x), 3) - 1e-6);
  }
}

TEST(AreaHessianFd, RejectsBadArguments) {
  const GradientMatrix z = GradientMatrix::Zero(2, 2);
  EXPECT_THROW(area_hessian_fd(z, 2.0 * diag2(1, 0)), InvalidInput);
  EXPECT_THROW(area_hessian_fd(z, diag2(1, 0), 1e-2), InvalidInput);
  EXPECT_THROW(area_hessian_fd(z, diag2(1, 0), 0.0), InvalidInput);
}

TEST(OrthogonalSymmetries, HoldOnRandomInputs) {
  Rng rng(47);
  for (int k = 0; k < 300; ++k) {
    const GradientMatrix z = random_z(4, 3.0, rng);
    const Eigen::MatrixXd n = random_orthogonal(4, rng);
    const Mat2 m = random_orthogonal(2, rng);
    EXPECT_LE((inner_stress(n * z) - inner_stress(z)).norm(), 1e-12);
    EXPECT_LE((inner_stress(z * m) - m.transpose() * inner_stress(z) * m).norm(), 1e-12);
    EXPECT_LE((area_gradient(n * z * m) - n * area_gradient(z) * m).norm(), 1e-12);
  }
}

TEST(VerifyIdentities, ZeroSamplesGivesEmptyReport) {
  const auto r = verify_identities(2, 0, 1, 1e-9);
  EXPECT_EQ(r.samples, 0u);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_TRUE(r.statistics.empty());
}

TEST(VerifyIdentities, NoViolations) {
  for (int n : {2, 5}) {
    const auto r = verify_identities(n, 10000, n == 2 ? 42 : 7, 1e-9);
    EXPECT_EQ(r.violation_count, 0u) << "n=" << n << "\n" << r.dump();
    EXPECT_EQ(r.get("checked.B_row_invariance"), 10000.0);
  }
}

TEST(VerifyIdentities, DeterministicAcrossThreadCounts) {
  const auto a = verify_identities(3, 5000, 9, 1e-9, 1);
  const auto b = verify_identities(3, 5000, 9, 1e-9, 4);
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(VerifyIdentities, FlagsAnImpossibleTolerance) {
  const auto r = verify_identities(3, 200, 9, -1.0);
  EXPECT_GT(r.violation_count, 0u);
  EXPECT_LE(r.violations.size(), ScanReport::kMaxRecorded);
  for (std::size_t i = 1; i < r.violations.size(); ++i)
    EXPECT_LE(r.violations[i - 1].index, r.violations[i].index);
}

TEST(VerifyIdentities, RejectsSmallN) { EXPECT_THROW(verify_identities(1, 10, 1, 1e-9), InvalidInput); }

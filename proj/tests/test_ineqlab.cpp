#include <gtest/gtest.h>

#include <cmath>

#include "minsurf/errors.hpp"
#include "minsurf/ineqlab.hpp"

using namespace minsurf;
using namespace minsurf::ineqlab;

namespace {

ScanConfig small_config(std::size_t samples) {
  ScanConfig c;
  c.samples = samples;
  c.seed = 7;
  return c;
}

GradientMatrix diag2(double a, double b) {
  GradientMatrix z(2, 2);
  z << a, 0, 0, b;
  return z;
}

}  // namespace

TEST(RankOneSample, MinorsVanishAndNormBounded) {
  Rng rng = sample_rng(3, 0, 0);
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + k % 4;
    const GradientMatrix X = rank_one_sample(2.0, n, rng);
    EXPECT_EQ(X.rows(), n);
    EXPECT_LE(X.norm(), 2.0 + 1e-15);
    EXPECT_LE(matcore::max_abs_minor(X), 1e-15);
  }
}

TEST(RankOneSample, ZeroLambdaGivesZero) {
  Rng rng = sample_rng(3, 0, 0);
  EXPECT_EQ(rank_one_sample(0.0, 3, rng).norm(), 0.0);
  EXPECT_THROW(rank_one_sample(-1.0, 2, rng), InvalidInput);
}

TEST(RankOneSample, Reproducible) {
  const ScanConfig c = small_config(1);
  const auto a = rank_one_pair(c, 0);
  const auto b = rank_one_pair(c, 0);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
  EXPECT_NE(rank_one_pair(c, 1).first, a.first);
}

TEST(Monotonicity, EqualPairExcluded) {
  const GradientMatrix X = diag2(1.0, 0.0);
  EXPECT_FALSE(monotonicity_ratio(X, X).has_value());
  EXPECT_FALSE(monotonicity_ratio(X, X + 1e-12 * diag2(1, 1)).has_value());
  EXPECT_TRUE(monotonicity_ratio(X, 0.5 * X).has_value());
}

TEST(Monotonicity, OneDimensionalOracle) {
  // Along the line t e1 (x) e1 the integrand is sqrt(1 + t^2), so the ratio is the secant
  // slope of t / sqrt(1 + t^2).
  const double a = 0.3, b = 1.7;
  const double expected = (b / std::sqrt(1 + b * b) - a / std::sqrt(1 + a * a)) / (b - a);
  EXPECT_NEAR(*monotonicity_ratio(diag2(b, 0), diag2(a, 0)), expected, 1e-14);
}

class RankOneFloor : public ::testing::TestWithParam<double> {};

TEST_P(RankOneFloor, MinRatioAboveAnalyticFloor) {
  ScanConfig c = small_config(20000);
  c.lambda = GetParam();
  const ScanReport r = convexity_rank_one_scan(c);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_GE(r.get("min_ratio"), std::pow(1 + c.lambda * c.lambda, -1.5) - 1e-6);
  EXPECT_LE(r.get("max_ratio"), 1.0 + 1e-12);
  EXPECT_DOUBLE_EQ(r.get("lambda_est"), 0.5 * r.get("min_ratio"));
}

INSTANTIATE_TEST_SUITE_P(Lambdas, RankOneFloor, ::testing::Values(0.5, 1.0, 2.0, 4.0));

TEST(RankOneScan, SmallLambdaLimit) {
  ScanConfig c = small_config(5000);
  c.lambda = 1e-3;
  const ScanReport r = convexity_rank_one_scan(c);
  EXPECT_GE(r.get("min_ratio"), 0.999);
  EXPECT_LE(r.get("min_ratio"), 1.001);
}

TEST(RankOneScan, HistogramCountsEvaluated) {
  const ScanReport r = convexity_rank_one_scan(small_config(3000));
  std::size_t total = 0;
  for (auto c : r.extra["histogram"]["counts"]) total += c.get<std::size_t>();
  EXPECT_EQ(total, r.evaluated);
  const std::string csv = histogram_csv(r);
  EXPECT_EQ(csv.rfind("bin_lo,bin_hi,count\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(r.extra["histogram"]["counts"].size()));
}

TEST(HessianScan, Examples) {
  GradientMatrix W = GradientMatrix::Zero(2, 2);
  W(0, 0) = 1.0;
  EXPECT_NEAR(matcore::area_hessian_fd(GradientMatrix::Zero(2, 2), W), 1.0, 1e-8);
  EXPECT_NEAR(matcore::area_hessian_fd(diag2(3, 0), W), std::pow(10.0, -1.5), 1e-8);
}

TEST(HessianScan, NoViolations) {
  const ScanReport r = hessian_rank_one_scan(small_config(10000));
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_GE(r.get("min_margin"), -1e-6);
  EXPECT_GE(r.get("min_value_over_bound"), 1.0 - 1e-6);
}

TEST(SmallDet, PairsRespectConstraints) {
  const ScanConfig c = small_config(1);
  for (double eps : {0.0, 0.1, 4.0})
    for (std::size_t i = 0; i < 200; ++i) {
      const auto [X, Y] = small_det_pair(c, eps, 100, i);
      for (const auto& Z : {X, Y}) {
        EXPECT_LE(Z.norm(), c.lambda * (1 + 1e-12));
        EXPECT_LE(matcore::max_abs_minor(Z), eps + 1e-12);
      }
    }
}

TEST(SmallDet, ZeroLevelClean) {
  const ScanConfig c = small_config(10000);
  const double lambda = 0.5 * convexity_rank_one_scan(c).get("min_ratio");
  EXPECT_EQ(small_det_scan_at(c, 0.0, lambda, 100).violation_count, 0u);
}

TEST(SmallDet, BisectionAndReplay) {
  const ScanConfig c = small_config(20000);
  const double lambda = 0.5 * convexity_rank_one_scan(c).get("min_ratio");
  const ScanReport r = small_det_convexity_scan(c, lambda, 6);
  EXPECT_GT(r.get("eps_est"), 0.0);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_GT(r.get("violations_at_lambda_sq"), 0.0);
  const Json& counter = r.extra["counterexamples_at_lambda_sq"];
  ASSERT_FALSE(counter.empty());
  for (const auto& v : counter) {
    const auto [X, Y] = small_det_pair(c, v["inputs"]["eps"], v["inputs"]["stream"], v["index"]);
    EXPECT_EQ(json_matrix(X), v["inputs"]["X"]);
    EXPECT_LT(*monotonicity_ratio(X, Y), lambda);
  }
  EXPECT_EQ(small_det_convexity_scan(c, lambda, 6).dump(), r.dump());
  EXPECT_THROW(small_det_convexity_scan(c, 0.0), InvalidInput);
}

TEST(QcPair, Constraints) {
  Rng rng = sample_rng(5, 0, 0);
  for (int k = 0; k < 500; ++k) {
    const auto [X, Y] = qc_pair_sample(4.0, 0.5, 10.0, rng);
    for (const Mat2& Z : {X, Y}) {
      EXPECT_LE(matcore::qc_distortion(Z), 4.0 * (1 + 1e-12));
      EXPECT_GE(Z.determinant(), 0.5 * (1 - 1e-12));
      EXPECT_LE(Z.norm(), 10.0 * (1 + 1e-12));
    }
  }
}

TEST(QcPair, KTwoIsConformal) {
  Rng rng = sample_rng(5, 0, 1);
  for (int k = 0; k < 50; ++k) {
    const Mat2 X = qc_pair_sample(2.0, 0.5, 10.0, rng).first;
    EXPECT_NEAR(X(0, 0), X(1, 1), 1e-12 * X.norm());
    EXPECT_NEAR(X(0, 1), -X(1, 0), 1e-12 * X.norm());
  }
}

TEST(QcPair, InfeasibleRejected) {
  Rng rng = sample_rng(5, 0, 2);
  EXPECT_THROW(qc_pair_sample(1.5, 0.5, 10.0, rng), InvalidInput);
  EXPECT_THROW(qc_pair_sample(4.0, 0.0, 10.0, rng), InvalidInput);
  EXPECT_THROW(qc_pair_sample(4.0, 0.5, 1.0, rng), InvalidInput);
  EXPECT_NO_THROW(qc_pair_sample(4.0, 0.5, std::sqrt(2.0), rng));
}

TEST(OrthogonalSplit, OrthogonalColumnsUnchanged) {
  Mat2 Y;
  Y << 1, -4, 2, 2;
  const auto s = orthogonal_split(Y);
  EXPECT_LE(s.Ye.norm(), 1e-15);
  EXPECT_LE((s.Yo - Y).norm(), 1e-15);
}

TEST(OrthogonalSplit, Identities) {
  Mat2 Y;
  Y << 1.5, 0.3, -2.0, 0.7;
  const auto s = orthogonal_split(Y);
  EXPECT_LE((s.Yo + s.Ye - Y).norm(), 1e-14);
  EXPECT_NEAR(s.Ye.cwiseProduct(s.Yo).sum(), 0.0, 1e-14);
  for (double t : {0.0, 0.25, 0.5, 1.0, -3.0}) EXPECT_NEAR((s.Yo + t * s.Ye).determinant(), Y.determinant(), 1e-13);
  Mat2 bad;
  bad << 0, 1, 0, 2;
  EXPECT_THROW(orthogonal_split(bad), DegenerateInput);
}

TEST(OrthogonalSplit, ScanAtTightTolerance) {
  ScanConfig c = small_config(20000);
  c.tol = 1e-12;
  const ScanReport r = orthogonal_split_scan(c);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_EQ(r.evaluated + r.excluded, c.samples);
}

TEST(Sptnull, SmallRun) {
  ScanConfig c = small_config(20000);
  c.n = 3;
  const ScanReport r = sptnull_scan(c, default_c1_grid());
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_GT(r.get("delta_est"), 0.0);
  EXPECT_EQ(r.get("hypothesis_consistent"), 1.0);
  EXPECT_GT(r.get("hypothesis_eps"), 0.0);
  std::size_t total = 0;
  for (const auto& [name, s] : r.extra["strata"].items()) {
    total += s["samples"].get<std::size_t>();
    EXPECT_GE(s["delta_at_overall_c1"].get<double>(), r.get("delta_est")) << name;
  }
  EXPECT_EQ(total, c.samples);
  EXPECT_THROW(sptnull_scan(c, {}), InvalidInput);
  EXPECT_THROW(sptnull_scan(c, {1.0, -1.0}), InvalidInput);
}

TEST(Sptnull, DeltaMonotoneInC1) {
  ScanConfig c = small_config(4000);
  c.n = 3;
  const ScanReport r = sptnull_scan(c, {0.1, 1.0, 10.0});
  const Json& t = r.extra["delta_by_c1"];
  EXPECT_LE(t[0]["delta"].get<double>(), t[1]["delta"].get<double>());
  EXPECT_LE(t[1]["delta"].get<double>(), t[2]["delta"].get<double>());
}

TEST(Reduction, MZeroIsIdentity) {
  Mat2 X;
  X << 2, 1, -1, 3;
  const auto r = reduction_to_M0_check(X, Eigen::MatrixXd::Zero(1, 2));
  EXPECT_LE((r.S - Mat2::Identity()).norm(), 1e-15);
  EXPECT_LE(r.deviation, 1e-14);
  EXPECT_TRUE(r.pass);
}

TEST(Reduction, RandomInputs) {
  Rng rng = sample_rng(9, 0, 0);
  for (int k = 0; k < 200; ++k) {
    const Mat2 X = random_in_ball(2, 2, 5.0, rng);
    const Eigen::MatrixXd M = random_in_ball(2, 2, 2.0, rng);
    const auto r = reduction_to_M0_check(X, M);
    EXPECT_TRUE(r.pass) << r.deviation << " " << r.lhs_norm;
    EXPECT_GE(r.s_min_eig, 1.0 - 1e-12);
    EXPECT_LE(r.s_max_eig, r.s_bound * (1 + 1e-12));
  }
}

TEST(Reduction, BoundAttainedAtRankOneM) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(1, 2);
  M(0, 1) = 1.0;
  const auto r = reduction_to_M0_check(Mat2::Identity(), M);
  EXPECT_NEAR(r.s_max_eig, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(r.s_bound, std::sqrt(2.0), 1e-14);
  EXPECT_THROW(reduction_to_M0_check(Mat2::Identity(), Eigen::MatrixXd::Zero(1, 3)), InvalidInput);
}

TEST(Boundedness, FlatSlopes) {
  ScanConfig c = small_config(20000);
  c.n = 3;
  const ScanReport r = boundedness_scan(c);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_LT(std::abs(r.get("slope_B")), 0.1);
  EXPECT_LT(std::abs(r.get("slope_DB_scaled")), 0.1);
  EXPECT_EQ(r.extra["bins"].size(), 3u);
}

TEST(Scans, IdenticalAcrossThreadCounts) {
  ScanConfig c = small_config(6000);
  c.n = 3;
  ScanConfig c4 = c;
  c4.threads = 4;
  EXPECT_EQ(convexity_rank_one_scan(c).dump(), convexity_rank_one_scan(c4).dump());
  EXPECT_EQ(hessian_rank_one_scan(c).dump(), hessian_rank_one_scan(c4).dump());
  EXPECT_EQ(sptnull_scan(c, default_c1_grid()).dump(), sptnull_scan(c4, default_c1_grid()).dump());
  EXPECT_EQ(boundedness_scan(c).dump(), boundedness_scan(c4).dump());
  EXPECT_EQ(small_det_convexity_scan(c, 0.04, 4).dump(), small_det_convexity_scan(c4, 0.04, 4).dump());
}

TEST(ScanConfig, Validation) {
  ScanConfig c;
  c.K = 1.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = ScanConfig{};
  c.n = 1;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = ScanConfig{};
  c.samples = 0;
  EXPECT_THROW(convexity_rank_one_scan(c), InvalidInput);
}

#pragma once

#include <optional>
#include <vector>

#include "minsurf/matcore.hpp"
#include "minsurf/report.hpp"
#include "minsurf/sampling.hpp"

namespace minsurf::ineqlab {

using matcore::GradientMatrix;
using matcore::Mat2;

struct ScanConfig {
  /// Gradient bound for the convexity scans.
  double lambda = 2.0;
  /// Quasiconformality constant, |X|^2 <= K det X.
  double K = 4.0;
  /// Determinant floor.
  double eps3 = 0.5;
  /// Bound on |M| (the rows below the 2x2 block).
  double L = 1.0;
  /// Upper bound on |X|, |Y| in the quasiconformal samplers.
  double cap = 10.0;
  int n = 2;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int threads = 1;

  void validate() const;
  Json to_json() const;
};

/// a b^T with a in R^n, b in R^2 uniform on the spheres and |a b^T| uniform in [0, lambda].
GradientMatrix rank_one_sample(double lambda, int n, Rng& rng);

/// <DA(X) - DA(Y), X - Y> / |X - Y|^2, or nothing when |X - Y| <= 1e-9 max(|X|, |Y|)
/// (including X = Y), which the scans log as excluded rather than as violations.
std::optional<double> monotonicity_ratio(const GradientMatrix& X, const GradientMatrix& Y);

/// The (X, Y) pair drawn for sample `index` of convexity_rank_one_scan.
std::pair<GradientMatrix, GradientMatrix> rank_one_pair(const ScanConfig& cfg, std::size_t index);

/// Minimum monotonicity ratio over rank-one pairs with |X|, |Y| <= lambda. Reports
/// lambda_est = min ratio / 2 and the analytic floor (1 + lambda^2)^{-3/2}; a ratio <= 0
/// is a violation.
ScanReport convexity_rank_one_scan(const ScanConfig& cfg);

/// area_hessian_fd(X, W) against 1/A(X)^3 for rank-one X and unit W; a margin below -tol
/// is a violation.
ScanReport hessian_rank_one_scan(const ScanConfig& cfg);

/// Pair for sample `index` of a small-determinant scan at level eps (stream selects the
/// bisection level). X and Y satisfy |X|, |Y| <= lambda and sigma_1 sigma_2 <= eps, which
/// bounds every 2x2 minor by eps. Odd indices draw Y near X.
std::pair<GradientMatrix, GradientMatrix> small_det_pair(const ScanConfig& cfg, double eps, std::uint64_t stream,
                                                         std::size_t index);

/// One small-determinant scan at fixed eps: violation when the monotonicity ratio < lambda_floor.
ScanReport small_det_scan_at(const ScanConfig& cfg, double eps, double lambda_floor, std::uint64_t stream);

/// Bisection over eps in [0, lambda^2] for the largest level with zero violations of
/// <DA(X) - DA(Y), X - Y> >= lambda_floor |X - Y|^2 (cfg.samples pairs per level). The
/// recorded violations are those of the eps = lambda^2 level.
ScanReport small_det_convexity_scan(const ScanConfig& cfg, double lambda_floor, int levels = 16);

/// (X, Y) with |.|^2 <= K det, det >= eps3 and |.| <= cap: singular-value ratio t log-uniform
/// in [1, t_max] with t + 1/t <= K, determinant log-uniform in its admissible range, random
/// rotations on both sides. Throws InvalidInput if K < 2, eps3 <= 0 or cap < sqrt(K eps3).
std::pair<Mat2, Mat2> qc_pair_sample(double K, double eps3, double cap, Rng& rng);

struct OrthogonalSplit {
  Mat2 Yo;
  Mat2 Ye;
};

/// Y = Yo + Ye with Ye = (0 | (Y1.Y2)/|Y1|^2 Y1) and Yo = (Y1 | det(Y)/|Y1|^2 J Y1).
/// Throws DegenerateInput if |Y1| <= 1e-12 |Y|.
OrthogonalSplit orthogonal_split(const Mat2& Y);

/// Reconstruction, <Ye, Yo> = 0, orthogonality of the columns of Yo and det(Yo + t Ye) = det Y
/// for t in {0, 1/4, 1/2, 1}, relative to |Y| or |Y|^2, over random Y. Samples with
/// |Y1| < 1e-6 |Y| are excluded.
ScanReport orthogonal_split_scan(const ScanConfig& cfg);

/// Default C1 grid {10^k : k = -2..6}.
std::vector<double> default_c1_grid();

/// delta(C1) = min over samples of [C1 min(|X|^2, |Y|^2) |B(X|M) - B(Y|M)|^2 + det(X - Y)] / |X - Y|^2
/// for pairs from qc_pair_sample and |M| <= L. Samples are stratified by index mod 4:
/// independent pairs, near pairs, M = 0, and M = 0 with Y having orthogonal columns.
/// A sample with non-positive ratio at every grid C1 is a violation.
/// For the best (C1, delta_est) the report also gives the largest eps such that every sample
/// with C1 min(|X|^2, |Y|^2) |B(X|M) - B(Y|M)|^2 < eps |X - Y|^2 has det(X - Y) >= delta_est |X - Y|^2,
/// re-checks that implication and logs max |Ye|^2 / (eps |X - Y|^2) over the M = 0 strata.
ScanReport sptnull_scan(const ScanConfig& cfg, const std::vector<double>& c1_grid);

struct ReductionCheck {
  Mat2 S;
  double lhs_norm = 0.0;
  double deviation = 0.0;
  double s_min_eig = 0.0;
  double s_max_eig = 0.0;
  /// sqrt(1 + |M|^2).
  double s_bound = 0.0;
  bool pass = false;
};

/// S = sqrt(id + M^T M); compares B(X|M) with det(S) S^{-1} B(X S^{-1}|0) S^{-1} and the
/// spectrum of S with [1, sqrt(1 + |M|^2)].
ReductionCheck reduction_to_M0_check(const Mat2& X, const Eigen::MatrixXd& M);

/// sup |B(X|M)| and sup |DB(X|M)| (1 + |X|) over quasiconformal X with |X| in [1, 10^3] and
/// |M| <= L, binned by decades of |X|; reports the least-squares slopes of log(max)
/// against log |X|. DB is a central-difference Jacobian with step 1e-5 (1 + |Z|).
ScanReport boundedness_scan(const ScanConfig& cfg);

/// Histogram CSV for a report that carries one ("bin_lo,bin_hi,count").
std::string histogram_csv(const ScanReport& report);

}  // namespace minsurf::ineqlab

#include "minsurf/ineqlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "minsurf/errors.hpp"

namespace minsurf::ineqlab {

namespace {

using matcore::area;
using matcore::area_gradient;
using matcore::BlockPair;
using matcore::inner_stress_blocks;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Seed streams, one per scan family.
enum Stream : std::uint64_t {
  kRankOne = 11,
  kHessian = 12,
  kSmallDet = 100,
  kSptnull = 21,
  kSplit = 41,
  kBounded = 31,
};

struct Histogram {
  double lo = 0, hi = 1;
  std::vector<std::size_t> counts;

  Histogram() = default;
  Histogram(double l, double h, int bins) : lo(l), hi(h), counts(bins, 0) {}
  void add(double x) {
    if (counts.empty() || std::isnan(x)) return;
    const double u = (x - lo) / (hi - lo) * counts.size();
    const auto k = static_cast<long>(std::floor(std::clamp(u, 0.0, counts.size() - 0.5)));
    ++counts[k];
  }
  void merge(const Histogram& o) {
    if (counts.empty()) *this = Histogram(o.lo, o.hi, static_cast<int>(o.counts.size()));
    for (std::size_t k = 0; k < counts.size() && k < o.counts.size(); ++k) counts[k] += o.counts[k];
  }
  Json to_json(const std::string& quantity) const {
    return {{"quantity", quantity}, {"lo", lo}, {"hi", hi}, {"counts", counts}};
  }
};

// Running reduction shared by the scans; min/max slots are addressed by position.
struct Partial {
  std::size_t evaluated = 0, excluded = 0, violation_count = 0;
  std::vector<double> mins, maxs;
  std::vector<Violation> violations;
  std::vector<std::size_t> excluded_indices;
  Histogram hist;

  Partial() = default;
  Partial(int nmin, int nmax) : mins(nmin, kInf), maxs(nmax, -kInf) {}

  void violate(Violation v) {
    ++violation_count;
    if (violations.size() < ScanReport::kMaxRecorded) violations.push_back(std::move(v));
  }
  void exclude(std::size_t idx) {
    ++excluded;
    if (excluded_indices.size() < 16) excluded_indices.push_back(idx);
  }
  void merge(Partial& o) {
    evaluated += o.evaluated;
    excluded += o.excluded;
    violation_count += o.violation_count;
    if (mins.empty()) mins.assign(o.mins.size(), kInf);
    if (maxs.empty()) maxs.assign(o.maxs.size(), -kInf);
    for (std::size_t k = 0; k < o.mins.size(); ++k) mins[k] = std::min(mins[k], o.mins[k]);
    for (std::size_t k = 0; k < o.maxs.size(); ++k) maxs[k] = std::max(maxs[k], o.maxs[k]);
    for (auto& v : o.violations)
      if (violations.size() < ScanReport::kMaxRecorded) violations.push_back(std::move(v));
    for (auto i : o.excluded_indices)
      if (excluded_indices.size() < 16) excluded_indices.push_back(i);
    hist.merge(o.hist);
  }
};

template <class Fn>
Partial run_blocks(const ScanConfig& cfg, int nmin, int nmax, Histogram h, Fn per_sample) {
  return parallel_blocks(
      cfg.samples, cfg.threads, Partial(nmin, nmax),
      [&](std::size_t begin, std::size_t end) {
        Partial p(nmin, nmax);
        p.hist = h;
        for (std::size_t i = begin; i < end; ++i) per_sample(i, p);
        return p;
      },
      [](Partial& acc, Partial& p) { acc.merge(p); });
}

ScanReport make_report(const std::string& kind, const ScanConfig& cfg, Partial& p) {
  ScanReport r;
  r.kind = kind;
  r.config = cfg.to_json();
  r.seed = cfg.seed;
  r.samples = cfg.samples;
  r.evaluated = p.evaluated;
  r.excluded = p.excluded;
  for (auto& v : p.violations) r.add_violation(std::move(v));
  r.violation_count = p.violation_count;
  if (!p.excluded_indices.empty()) r.extra["excluded_indices"] = p.excluded_indices;
  return r;
}

Eigen::MatrixXd random_unit_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const Eigen::VectorXd v = random_unit_vector(rows * cols, rng);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

double max_ratio_t(double K) { return 0.5 * (K + std::sqrt(std::max(0.0, K * K - 4.0))); }

struct QcParams {
  double t, d, th1, th2;
};

QcParams qc_params(double K, double eps3, double cap, Rng& rng) {
  QcParams p;
  p.t = log_uniform(rng, 1.0, max_ratio_t(K));
  p.d = log_uniform(rng, eps3, cap * cap / (p.t + 1.0 / p.t));
  p.th1 = uniform(rng, -M_PI, M_PI);
  p.th2 = uniform(rng, -M_PI, M_PI);
  return p;
}

Mat2 qc_build(const QcParams& p) {
  const Mat2 s = Eigen::Vector2d(std::sqrt(p.d * p.t), std::sqrt(p.d / p.t)).asDiagonal();
  return rotation(p.th1) * s * rotation(p.th2);
}

QcParams qc_perturb(QcParams p, double K, double eps3, double cap, Rng& rng) {
  const double r = log_uniform(rng, 1e-6, 1e-1);
  p.t = std::clamp(p.t * std::exp(r * standard_normal(rng)), 1.0, max_ratio_t(K));
  p.d = std::clamp(p.d * std::exp(r * standard_normal(rng)), eps3, cap * cap / (p.t + 1.0 / p.t));
  p.th1 += r * standard_normal(rng);
  p.th2 += r * standard_normal(rng);
  return p;
}

void check_qc_bounds(double K, double eps3, double cap) {
  if (!(K >= 2.0)) throw InvalidInput("quasiconformal sampler: K must be >= 2");
  if (!(eps3 > 0.0)) throw InvalidInput("quasiconformal sampler: eps3 must be > 0");
  if (!(cap >= std::sqrt(K * eps3))) throw InvalidInput("quasiconformal sampler: cap < sqrt(K eps3) is infeasible");
}

// sigma_1 sigma_2 <= eps and |X| <= lambda, with the frame drawn uniformly.
GradientMatrix small_det_matrix(double lambda, double eps, int n, Rng& rng) {
  const double s = lambda * uniform(rng, 0.0, 1.0);
  const double p = uniform(rng, 0.0, std::min(eps, 0.5 * s * s));
  const double s1 = std::sqrt(0.5 * (s * s + std::sqrt(std::max(0.0, s * s * s * s - 4 * p * p))));
  const double s2 = s1 > 0 ? p / s1 : 0.0;
  const Eigen::MatrixXd U = random_orthogonal(n, rng);
  const Eigen::MatrixXd V = random_orthogonal(2, rng);
  return U.leftCols(2) * Eigen::Vector2d(s1, s2).asDiagonal() * V.transpose();
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

}  // namespace

void ScanConfig::validate() const {
  if (!(lambda > 0) || !(K > 0) || !(eps3 > 0) || !(L > 0) || !(cap > 0))
    throw InvalidInput("ScanConfig: lambda, K, eps3, L and cap must be positive");
  if (!(K >= 2)) throw InvalidInput("ScanConfig: K must be >= 2");
  if (n < 2) throw InvalidInput("ScanConfig: n must be >= 2");
  if (samples < 1) throw InvalidInput("ScanConfig: samples must be >= 1");
  if (!(tol >= 0)) throw InvalidInput("ScanConfig: tol must be >= 0");
}

Json ScanConfig::to_json() const {
  return {{"lambda", lambda}, {"K", K},   {"eps3", eps3}, {"L", L},     {"cap", cap},
          {"n", n},           {"samples", samples}, {"seed", seed}, {"tol", tol}};
}

GradientMatrix rank_one_sample(double lambda, int n, Rng& rng) {
  if (!(lambda >= 0) || n < 1) throw InvalidInput("rank_one_sample: need lambda >= 0 and n >= 1");
  const Eigen::VectorXd a = random_unit_vector(n, rng);
  const Eigen::VectorXd b = random_unit_vector(2, rng);
  return lambda * uniform(rng, 0.0, 1.0) * a * b.transpose();
}

std::optional<double> monotonicity_ratio(const GradientMatrix& X, const GradientMatrix& Y) {
  const GradientMatrix d = X - Y;
  const double nd = d.norm();
  if (!(nd > 1e-9 * std::max(X.norm(), Y.norm())) || nd == 0.0) return std::nullopt;
  return (area_gradient(X) - area_gradient(Y)).cwiseProduct(d).sum() / (nd * nd);
}

std::pair<GradientMatrix, GradientMatrix> rank_one_pair(const ScanConfig& cfg, std::size_t index) {
  Rng rng = sample_rng(cfg.seed, kRankOne, index);
  GradientMatrix X = rank_one_sample(cfg.lambda, cfg.n, rng);
  GradientMatrix Y = rank_one_sample(cfg.lambda, cfg.n, rng);
  return {std::move(X), std::move(Y)};
}

ScanReport convexity_rank_one_scan(const ScanConfig& cfg) {
  cfg.validate();
  Partial p = run_blocks(cfg, 1, 1, Histogram(0.0, 1.05, 42), [&](std::size_t i, Partial& part) {
    const auto [X, Y] = rank_one_pair(cfg, i);
    const auto r = monotonicity_ratio(X, Y);
    if (!r) return part.exclude(i);
    ++part.evaluated;
    part.mins[0] = std::min(part.mins[0], *r);
    part.maxs[0] = std::max(part.maxs[0], *r);
    part.hist.add(*r);
    if (!(*r > 0)) part.violate({i, "monotonicity_positive", {{"X", json_matrix(X)}, {"Y", json_matrix(Y)}}, *r, 0.0});
  });
  ScanReport rep = make_report("rank1-convexity", cfg, p);
  const double floor = std::pow(1.0 + cfg.lambda * cfg.lambda, -1.5);
  rep.set("min_ratio", p.mins[0]);
  rep.set("max_ratio", p.maxs[0]);
  rep.set("lambda_est", 0.5 * p.mins[0]);
  rep.set("analytic_floor", floor);
  rep.set("floor_margin", p.mins[0] - floor);
  rep.extra["histogram"] = p.hist.to_json("monotonicity_ratio");
  return rep;
}

ScanReport hessian_rank_one_scan(const ScanConfig& cfg) {
  cfg.validate();
  Partial p = run_blocks(cfg, 2, 1, Histogram(-1.0, 2.0, 60), [&](std::size_t i, Partial& part) {
    Rng rng = sample_rng(cfg.seed, kHessian, i);
    const GradientMatrix X = rank_one_sample(cfg.lambda, cfg.n, rng);
    const GradientMatrix W = random_unit_matrix(cfg.n, 2, rng);
    const double value = matcore::area_hessian_fd(X, W);
    const double a = area(X);
    const double bound = 1.0 / (a * a * a);
    const double margin = value - bound;
    ++part.evaluated;
    part.mins[0] = std::min(part.mins[0], margin);
    part.mins[1] = std::min(part.mins[1], value / bound);
    part.maxs[0] = std::max(part.maxs[0], margin);
    part.hist.add(std::log10(std::max(value / bound, 1e-300)));
    if (margin < -cfg.tol) part.violate({i, "hessian_floor", {{"X", json_matrix(X)}, {"W", json_matrix(W)}}, value, bound});
  });
  ScanReport rep = make_report("hessian", cfg, p);
  rep.set("min_margin", p.mins[0]);
  rep.set("max_margin", p.maxs[0]);
  rep.set("min_value_over_bound", p.mins[1]);
  rep.extra["histogram"] = p.hist.to_json("log10(value/bound)");
  return rep;
}

std::pair<GradientMatrix, GradientMatrix> small_det_pair(const ScanConfig& cfg, double eps, std::uint64_t stream,
                                                         std::size_t index) {
  Rng rng = sample_rng(cfg.seed, stream, index);
  GradientMatrix X = small_det_matrix(cfg.lambda, eps, cfg.n, rng);
  if (index % 2 == 1) {
    const double r = cfg.lambda * log_uniform(rng, 1e-6, 1e-1);
    GradientMatrix Y = X + r * random_unit_matrix(cfg.n, 2, rng);
    if (Y.norm() <= cfg.lambda && std::sqrt(matcore::minor_square_sum(Y)) <= eps) return {std::move(X), std::move(Y)};
  }
  GradientMatrix Y = small_det_matrix(cfg.lambda, eps, cfg.n, rng);
  return {std::move(X), std::move(Y)};
}

ScanReport small_det_scan_at(const ScanConfig& cfg, double eps, double lambda_floor, std::uint64_t stream) {
  cfg.validate();
  if (!(eps >= 0)) throw InvalidInput("small_det_scan_at: eps must be >= 0");
  Partial p = run_blocks(cfg, 1, 0, Histogram(-1.0, 1.05, 82), [&](std::size_t i, Partial& part) {
    const auto [X, Y] = small_det_pair(cfg, eps, stream, i);
    const auto r = monotonicity_ratio(X, Y);
    if (!r) return part.exclude(i);
    ++part.evaluated;
    part.mins[0] = std::min(part.mins[0], *r);
    part.hist.add(*r);
    if (*r < lambda_floor)
      part.violate({i, "small_det_monotonicity", {{"X", json_matrix(X)}, {"Y", json_matrix(Y)}, {"eps", eps}, {"stream", stream}}, *r, lambda_floor});
  });
  ScanReport rep = make_report("small-det-level", cfg, p);
  rep.set("eps", eps);
  rep.set("lambda_floor", lambda_floor);
  rep.set("min_ratio", p.mins[0]);
  rep.extra["histogram"] = p.hist.to_json("monotonicity_ratio");
  return rep;
}

ScanReport small_det_convexity_scan(const ScanConfig& cfg, double lambda_floor, int levels) {
  cfg.validate();
  if (!(lambda_floor > 0)) throw InvalidInput("small_det_convexity_scan: lambda must be > 0");
  const double top = cfg.lambda * cfg.lambda;
  const ScanReport at_zero = small_det_scan_at(cfg, 0.0, lambda_floor, kSmallDet);
  const ScanReport at_top = small_det_scan_at(cfg, top, lambda_floor, kSmallDet + 1);

  Json trail = Json::array();
  double lo = 0.0, hi = top;
  ScanReport accepted = at_zero;
  for (int k = 0; k < levels; ++k) {
    const double mid = 0.5 * (lo + hi);
    ScanReport level = small_det_scan_at(cfg, mid, lambda_floor, kSmallDet + 2 + k);
    trail.push_back({{"eps", mid}, {"violations", level.violation_count}, {"min_ratio", json_number(level.get("min_ratio"))}});
    if (level.violation_count == 0) {
      lo = mid;
      accepted = std::move(level);
    } else {
      hi = mid;
    }
  }

  ScanReport rep;
  rep.kind = "small-det";
  rep.config = cfg.to_json();
  rep.config["lambda_floor"] = lambda_floor;
  rep.config["levels"] = levels;
  rep.seed = cfg.seed;
  rep.samples = cfg.samples;
  rep.evaluated = accepted.evaluated;
  rep.excluded = accepted.excluded;
  rep.set("eps_est", lo);
  rep.set("eps_first_failure", hi);
  rep.set("min_ratio_at_eps_est", accepted.get("min_ratio"));
  rep.set("violations_at_zero", static_cast<double>(at_zero.violation_count));
  rep.set("min_ratio_at_zero", at_zero.get("min_ratio"));
  rep.set("violations_at_lambda_sq", static_cast<double>(at_top.violation_count));
  rep.set("min_ratio_at_lambda_sq", at_top.get("min_ratio"));
  // Zero by construction unless eps_est = 0 and the rank-one level itself failed.
  rep.violation_count = accepted.violation_count;
  rep.violations = accepted.violations;
  Json counter = Json::array();
  for (const auto& v : at_top.violations)
    counter.push_back({{"index", v.index}, {"check", v.check}, {"inputs", v.inputs}, {"lhs", json_number(v.lhs)}, {"rhs", json_number(v.rhs)}});
  rep.extra["bisection"] = trail;
  rep.extra["counterexamples_at_lambda_sq"] = counter;
  rep.extra["histogram"] = at_top.extra["histogram"];
  return rep;
}

std::pair<Mat2, Mat2> qc_pair_sample(double K, double eps3, double cap, Rng& rng) {
  check_qc_bounds(K, eps3, cap);
  const Mat2 X = qc_build(qc_params(K, eps3, cap, rng));
  const Mat2 Y = qc_build(qc_params(K, eps3, cap, rng));
  return {X, Y};
}

OrthogonalSplit orthogonal_split(const Mat2& Y) {
  const Eigen::Vector2d y1 = Y.col(0), y2 = Y.col(1);
  const double n1 = y1.squaredNorm();
  if (!(std::sqrt(n1) > 1e-12 * Y.norm())) throw DegenerateInput("orthogonal_split: first column vanishes");
  const Eigen::Vector2d jy1(-y1.y(), y1.x());
  OrthogonalSplit s;
  s.Ye.col(0).setZero();
  s.Ye.col(1) = y1.dot(y2) / n1 * y1;
  s.Yo.col(0) = y1;
  s.Yo.col(1) = Y.determinant() / n1 * jy1;
  return s;
}

ScanReport orthogonal_split_scan(const ScanConfig& cfg) {
  cfg.validate();
  enum { kRecon, kInner, kColumns, kDet };
  static const char* names[] = {"reconstruction", "inner_product", "yo_columns", "det_preservation"};
  Partial p = run_blocks(cfg, 0, 4, Histogram(), [&](std::size_t i, Partial& part) {
    Rng rng = sample_rng(cfg.seed, kSplit, i);
    const double scale = log_uniform(rng, 1e-3, 1e3);
    Mat2 Y;
    for (int k = 0; k < 4; ++k) Y(k / 2, k % 2) = scale * standard_normal(rng);
    const double ny = Y.norm();
    if (Y.col(0).norm() < 1e-6 * ny) return part.exclude(i);
    ++part.evaluated;
    const auto s = orthogonal_split(Y);
    double dev[4];
    dev[kRecon] = (s.Yo + s.Ye - Y).norm() / ny;
    dev[kInner] = std::abs(s.Ye.cwiseProduct(s.Yo).sum()) / (ny * ny);
    dev[kColumns] = std::abs(s.Yo.col(0).dot(s.Yo.col(1))) / (ny * ny);
    dev[kDet] = 0.0;
    for (double t : {0.0, 0.25, 0.5, 1.0})
      dev[kDet] = std::max(dev[kDet], std::abs((s.Yo + t * s.Ye).determinant() - Y.determinant()) / (ny * ny));
    for (int k = 0; k < 4; ++k) {
      part.maxs[k] = std::max(part.maxs[k], dev[k]);
      if (dev[k] > cfg.tol) part.violate({i, names[k], {{"Y", json_matrix(Y)}}, dev[k], cfg.tol});
    }
  });
  ScanReport rep = make_report("orthogonal-split", cfg, p);
  for (int k = 0; k < 4; ++k) rep.set(std::string("max_dev.") + names[k], p.evaluated ? p.maxs[k] : 0.0);
  return rep;
}

std::vector<double> default_c1_grid() {
  std::vector<double> g;
  for (int k = -2; k <= 6; ++k) g.push_back(std::pow(10.0, k));
  return g;
}

namespace {

constexpr int kStrata = 4;
const char* kStratumNames[kStrata] = {"independent", "near", "m0", "m0_orthogonal"};

struct SptSample {
  Mat2 X, Y;
  GradientMatrix M;
  int stratum = 0;
  bool excluded = false;
  double nd2 = 0.0;
  double det = 0.0;
  // min(|X|^2, |Y|^2) |B(X|M) - B(Y|M)|^2
  double stress = 0.0;
};

SptSample sptnull_sample(const ScanConfig& cfg, std::size_t i) {
  Rng rng = sample_rng(cfg.seed, kSptnull, i);
  SptSample s;
  s.stratum = static_cast<int>(i % kStrata);
  const QcParams px = qc_params(cfg.K, cfg.eps3, cfg.cap, rng);
  QcParams py = s.stratum == 1 ? qc_perturb(px, cfg.K, cfg.eps3, cfg.cap, rng) : qc_params(cfg.K, cfg.eps3, cfg.cap, rng);
  if (s.stratum == 3) py.th2 = 0.0;
  s.X = qc_build(px);
  s.Y = qc_build(py);
  s.M = s.stratum >= 2 ? GradientMatrix(GradientMatrix::Zero(cfg.n - 2, 2))
                       : GradientMatrix(random_in_ball(cfg.n - 2, 2, cfg.L, rng));
  const Mat2 d = s.X - s.Y;
  s.nd2 = d.squaredNorm();
  s.excluded = !(std::sqrt(s.nd2) > 1e-9 * std::max(s.X.norm(), s.Y.norm()));
  if (s.excluded) return s;
  s.det = d.determinant();
  s.stress = std::min(s.X.squaredNorm(), s.Y.squaredNorm()) *
             (inner_stress_blocks({s.X, s.M}) - inner_stress_blocks({s.Y, s.M})).squaredNorm();
  return s;
}

struct SptPartial {
  Partial base;
  // delta[stratum][grid index]
  std::vector<std::vector<double>> delta;
  std::vector<std::size_t> stratum_count, stratum_violations;

  explicit SptPartial(std::size_t g = 0)
      : delta(kStrata, std::vector<double>(g, kInf)), stratum_count(kStrata, 0), stratum_violations(kStrata, 0) {}

  void merge(SptPartial& o) {
    base.merge(o.base);
    for (int s = 0; s < kStrata; ++s) {
      for (std::size_t k = 0; k < delta[s].size(); ++k) delta[s][k] = std::min(delta[s][k], o.delta[s][k]);
      stratum_count[s] += o.stratum_count[s];
      stratum_violations[s] += o.stratum_violations[s];
    }
  }
};

// |Ye|^2 of the Step-4 splitting after reducing to |Y| <= |X| and X diagonal.
double reduced_ye_norm2(Mat2 X, Mat2 Y) {
  if (Y.norm() > X.norm()) std::swap(X, Y);
  const auto svd = matcore::svd2(X);
  const Mat2 Yr = svd.U.transpose() * Y * svd.V;
  if (!(Yr.col(0).norm() > 1e-12 * Yr.norm())) return Yr.col(1).squaredNorm();
  return orthogonal_split(Yr).Ye.squaredNorm();
}

}  // namespace

ScanReport sptnull_scan(const ScanConfig& cfg, const std::vector<double>& grid) {
  cfg.validate();
  check_qc_bounds(cfg.K, cfg.eps3, cfg.cap);
  if (grid.empty()) throw InvalidInput("sptnull_scan: C1 grid must be nonempty");
  for (double c : grid)
    if (!(c > 0) || !std::isfinite(c)) throw InvalidInput("sptnull_scan: C1 values must be positive and finite");
  const double c1_max = *std::max_element(grid.begin(), grid.end());
  const std::size_t g = grid.size();

  SptPartial p = parallel_blocks(
      cfg.samples, cfg.threads, SptPartial(g),
      [&](std::size_t begin, std::size_t end) {
        SptPartial part(g);
        part.base.hist = Histogram(-0.5, 0.5, 50);
        for (std::size_t i = begin; i < end; ++i) {
          const SptSample s = sptnull_sample(cfg, i);
          ++part.stratum_count[s.stratum];
          if (s.excluded) {
            part.base.exclude(i);
            continue;
          }
          ++part.base.evaluated;
          part.base.hist.add(s.det / s.nd2);
          for (std::size_t k = 0; k < g; ++k)
            part.delta[s.stratum][k] = std::min(part.delta[s.stratum][k], (grid[k] * s.stress + s.det) / s.nd2);
          const double best = (c1_max * s.stress + s.det) / s.nd2;
          if (!(best > 0)) {
            ++part.stratum_violations[s.stratum];
            part.base.violate({i, "sptnull_all_c1",
                               {{"X", json_matrix(s.X)}, {"Y", json_matrix(s.Y)}, {"M", json_matrix(s.M)},
                                {"stratum", kStratumNames[s.stratum]}},
                               best, 0.0});
          }
        }
        return part;
      },
      [](SptPartial& acc, SptPartial& part) { acc.merge(part); });

  ScanReport rep = make_report("sptnull", cfg, p.base);
  rep.config["c1_grid"] = grid;
  std::vector<double> overall(g, kInf);
  for (int s = 0; s < kStrata; ++s)
    for (std::size_t k = 0; k < g; ++k) overall[k] = std::min(overall[k], p.delta[s][k]);
  auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  const std::size_t kb = argmax(overall);
  const double c1 = grid[kb], delta = overall[kb];
  rep.set("c1_best", c1);
  rep.set("delta_est", delta);

  // The hypothesis C1 min(|X|^2,|Y|^2) |B(X|M) - B(Y|M)|^2 < eps |X - Y|^2 with the largest eps
  // for which no sample has det(X - Y) < delta_est |X - Y|^2. Second pass finds eps, third
  // pass re-checks the det bound on the hypothesis set and logs the Step-4 chain constant.
  Partial eps_pass = run_blocks(cfg, 1, 0, Histogram(), [&](std::size_t i, Partial& part) {
    const SptSample s = sptnull_sample(cfg, i);
    if (!s.excluded && s.det < delta * s.nd2) part.mins[0] = std::min(part.mins[0], c1 * s.stress / s.nd2);
  });
  const double eps = eps_pass.mins[0];
  Partial hyp = run_blocks(cfg, 1, 1, Histogram(), [&](std::size_t i, Partial& part) {
    const SptSample s = sptnull_sample(cfg, i);
    if (s.excluded || !(c1 * s.stress < eps * s.nd2)) return;
    ++part.evaluated;
    part.mins[0] = std::min(part.mins[0], s.det / s.nd2);
    if (s.stratum >= 2 && std::isfinite(eps))
      part.maxs[0] = std::max(part.maxs[0], reduced_ye_norm2(s.X, s.Y) / (eps * s.nd2));
    if (s.det < delta * s.nd2)
      part.violate({i, "sptnull_hypothesis", {{"X", json_matrix(s.X)}, {"Y", json_matrix(s.Y)}, {"M", json_matrix(s.M)}},
                    s.det / s.nd2, delta});
  });
  rep.set("hypothesis_eps", eps);
  rep.set("hypothesis_samples", static_cast<double>(hyp.evaluated));
  rep.set("hypothesis_min_det_ratio", hyp.mins[0]);
  rep.set("hypothesis_consistent", hyp.violation_count == 0 ? 1.0 : 0.0);
  rep.set("step4_chain_constant", hyp.maxs[0] > 0 ? hyp.maxs[0] : 0.0);
  for (auto& v : hyp.violations) rep.add_violation(std::move(v));

  Json table = Json::array();
  for (std::size_t k = 0; k < g; ++k) table.push_back({{"c1", grid[k]}, {"delta", json_number(overall[k])}});
  rep.extra["delta_by_c1"] = table;
  Json strata = Json::object();
  for (int s = 0; s < kStrata; ++s) {
    const std::size_t ks = argmax(p.delta[s]);
    strata[kStratumNames[s]] = {{"samples", p.stratum_count[s]},
                                {"c1_best", grid[ks]},
                                {"delta_est", json_number(p.delta[s][ks])},
                                {"delta_at_overall_c1", json_number(p.delta[s][kb])},
                                {"violations", p.stratum_violations[s]}};
  }
  rep.extra["strata"] = strata;
  rep.extra["histogram"] = p.base.hist.to_json("det(X-Y)/|X-Y|^2");
  return rep;
}

ReductionCheck reduction_to_M0_check(const Mat2& X, const Eigen::MatrixXd& M) {
  if (M.cols() != 2) throw InvalidInput("reduction_to_M0_check: M must have two columns");
  if (!X.allFinite() || !M.allFinite()) throw InvalidInput("reduction_to_M0_check: non-finite input");
  ReductionCheck r;
  const Eigen::SelfAdjointEigenSolver<Mat2> es(Mat2::Identity() + M.transpose() * M);
  const Eigen::Vector2d root = es.eigenvalues().cwiseSqrt();
  r.S = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  const Mat2 Sinv = es.eigenvectors() * root.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Mat2 lhs = inner_stress_blocks({X, M});
  const Mat2 rhs = root.prod() * Sinv * matcore::inner_stress(X * Sinv) * Sinv;
  r.lhs_norm = lhs.norm();
  r.deviation = (lhs - rhs).norm();
  r.s_min_eig = root.minCoeff();
  r.s_max_eig = root.maxCoeff();
  r.s_bound = std::sqrt(1.0 + M.squaredNorm());
  r.pass = r.deviation <= 1e-10 * r.lhs_norm && r.s_min_eig >= 1.0 - 1e-12 && r.s_max_eig <= r.s_bound * (1 + 1e-12);
  return r;
}

ScanReport boundedness_scan(const ScanConfig& cfg) {
  cfg.validate();
  constexpr int kBins = 3;
  // mins unused; maxs: sup|B| per bin, then sup|DB|(1+|X|) per bin.
  Partial p = run_blocks(cfg, 0, 2 * kBins, Histogram(), [&](std::size_t i, Partial& part) {
    Rng rng = sample_rng(cfg.seed, kBounded, i);
    const double size = std::pow(10.0, uniform(rng, 0.0, 3.0));
    const double t = log_uniform(rng, 1.0, max_ratio_t(cfg.K));
    const QcParams q{t, size * size / (t + 1.0 / t), uniform(rng, -M_PI, M_PI), uniform(rng, -M_PI, M_PI)};
    const Mat2 X = qc_build(q);
    const GradientMatrix M = random_in_ball(cfg.n - 2, 2, cfg.L, rng);
    const GradientMatrix Z = BlockPair(X, M).stacked();
    const double b = matcore::inner_stress(Z).norm();
    const double h = 1e-5 * (1.0 + Z.norm());
    double jac2 = 0.0;
    for (Eigen::Index e = 0; e < Z.size(); ++e) {
      GradientMatrix zp = Z, zm = Z;
      zp(e % Z.rows(), e / Z.rows()) += h;
      zm(e % Z.rows(), e / Z.rows()) -= h;
      jac2 += ((matcore::inner_stress(zp) - matcore::inner_stress(zm)) / (2 * h)).squaredNorm();
    }
    const double scaled = std::sqrt(jac2) * (1.0 + X.norm());
    const int bin = std::clamp(static_cast<int>(std::floor(std::log10(X.norm()))), 0, kBins - 1);
    ++part.evaluated;
    part.maxs[bin] = std::max(part.maxs[bin], b);
    part.maxs[kBins + bin] = std::max(part.maxs[kBins + bin], scaled);
  });
  ScanReport rep = make_report("boundedness", cfg, p);
  std::vector<double> lx, lb, ld;
  Json bins = Json::array();
  for (int k = 0; k < kBins; ++k) {
    const double lo = std::pow(10.0, k), hi = std::pow(10.0, k + 1);
    bins.push_back({{"x_lo", lo}, {"x_hi", hi}, {"sup_B", json_number(p.maxs[k])}, {"sup_DB_scaled", json_number(p.maxs[kBins + k])}});
    if (p.maxs[k] > 0) {
      lx.push_back(std::log(std::sqrt(lo * hi)));
      lb.push_back(std::log(p.maxs[k]));
      ld.push_back(std::log(p.maxs[kBins + k]));
    }
  }
  const double sb = lx.size() >= 2 ? slope(lx, lb) : 0.0;
  const double sd = lx.size() >= 2 ? slope(lx, ld) : 0.0;
  rep.set("sup_B", *std::max_element(p.maxs.begin(), p.maxs.begin() + kBins));
  rep.set("sup_DB_scaled", *std::max_element(p.maxs.begin() + kBins, p.maxs.end()));
  rep.set("slope_B", sb);
  rep.set("slope_DB_scaled", sd);
  rep.extra["bins"] = bins;
  for (auto [name, s] : {std::pair{"slope_B", sb}, std::pair{"slope_DB_scaled", sd}}) {
    if (std::abs(s) > 0.1) {
      ++rep.violation_count;
      rep.add_violation({0, name, Json::object(), s, 0.1});
    }
  }
  return rep;
}

std::string histogram_csv(const ScanReport& report) {
  if (!report.extra.contains("histogram")) throw InvalidInput("report '" + report.kind + "' has no histogram");
  const Json& h = report.extra["histogram"];
  const double lo = h["lo"], hi = h["hi"];
  const auto counts = h["counts"].get<std::vector<std::size_t>>();
  std::ostringstream os;
  os.precision(17);
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < counts.size(); ++k)
    os << lo + (hi - lo) * k / counts.size() << ',' << lo + (hi - lo) * (k + 1) / counts.size() << ',' << counts[k] << '\n';
  return os.str();
}

}  // namespace minsurf::ineqlab

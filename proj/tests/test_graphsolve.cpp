#include <gtest/gtest.h>

#include <cmath>

#include "minsurf/errors.hpp"
#include "minsurf/graphsolve.hpp"
#include "minsurf/sampling.hpp"

using namespace minsurf;
using namespace minsurf::graphsolve;

namespace {

MeshPtr disc(int rings) { return std::make_shared<const Mesh>(Mesh::unit_disc(rings)); }
MeshPtr square(int cells) { return std::make_shared<const Mesh>(Mesh::unit_square(cells)); }

DiscreteMap random_map(MeshPtr m, int n, std::uint64_t seed, double amp) {
  Rng rng(seed);
  Eigen::MatrixXd v(m->num_nodes(), n);
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < n; ++j) v(i, j) = uniform(rng, -amp, amp);
  return DiscreteMap(m, v);
}

DiscreteMap holo_z2(MeshPtr m, double scale) {
  return sample_map(m, 2, [scale](const Vec2& p) {
    return Eigen::VectorXd(Eigen::Vector2d(p.x() * p.x() - p.y() * p.y(), 2 * p.x() * p.y()) * scale);
  });
}

// Scalar oracle: Newton on the P1 minimal-graph energy sum_T sqrt(1+|grad u|^2)|T|, with
// its own element geometry and a dense Hessian. Shares no code with the library solver.
Eigen::VectorXd scalar_newton(const Mesh& m, const Eigen::VectorXd& boundary_full) {
  const int nn = m.num_nodes();
  Eigen::VectorXd u = boundary_full;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nn);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nn, nn);
    for (const auto& tri : m.triangles()) {
      const Vec2 a = m.node(tri[0]), b = m.node(tri[1]), c = m.node(tri[2]);
      const double area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      // Gradients of the hat functions: rotated opposite edges over twice the area.
      Eigen::Matrix<double, 3, 2> G;
      const Vec2 e[3] = {c - b, a - c, b - a};
      for (int k = 0; k < 3; ++k) G.row(k) = Vec2(-e[k].y(), e[k].x()).transpose() / area2;
      Vec2 p = Vec2::Zero();
      for (int k = 0; k < 3; ++k) p += u(tri[k]) * G.row(k).transpose();
      const double w = std::sqrt(1 + p.squaredNorm());
      const Eigen::Matrix2d hp = Eigen::Matrix2d::Identity() / w - p * p.transpose() / (w * w * w);
      for (int i = 0; i < 3; ++i) {
        g(tri[i]) += 0.5 * area2 * G.row(i).dot(p) / w;
        for (int j = 0; j < 3; ++j) H(tri[i], tri[j]) += 0.5 * area2 * G.row(i) * hp * G.row(j).transpose();
      }
    }
    for (int i = 0; i < nn; ++i) {
      if (!m.is_boundary(i)) continue;
      g(i) = 0;
      H.row(i).setZero();
      H.col(i).setZero();
      H(i, i) = 1;
    }
    const Eigen::VectorXd du = H.ldlt().solve(g);
    u -= du;
    if (du.lpNorm<Eigen::Infinity>() < 1e-14) break;
  }
  return u;
}

}  // namespace

TEST(Energy, ZeroMapOnSquareIsOne) {
  EXPECT_NEAR(assemble_energy(DiscreteMap(square(6), Eigen::MatrixXd::Zero(49, 3))), 1.0, 1e-14);
}

TEST(Energy, AffineMapGivesAreaTimesDomain) {
  auto m = disc(5);
  GradientMatrix Z(3, 2);
  Z << 0.3, -1.2, 2.0, 0.5, -0.7, 0.9;
  const auto u = sample_map(m, 3, [&](const Vec2& p) { return Eigen::VectorXd(Z * p); });
  EXPECT_NEAR(assemble_energy(u), matcore::area(Z) * m->total_area(), 1e-12);
  EXPECT_NEAR(assemble_gradient(u).norm(), 0.0, 1e-12);
  EXPECT_NEAR(inner_variation_residual(u), 0.0, 1e-12);
  EXPECT_NEAR(outer_variation_residual(u), 0.0, 1e-12);
}

TEST(Energy, BoundedBelowByDomainArea) {
  auto m = disc(4);
  for (std::uint64_t s = 0; s < 5; ++s) EXPECT_GT(assemble_energy(random_map(m, 2, s, 0.3)), m->total_area());
}

// Oracle: tensor Gauss-Legendre quadrature of A(Du) for a smooth map on the unit square.
TEST(Energy, ConvergesToQuadratureAtFirstOrder) {
  auto fn = [](const Vec2& p) {
    return Eigen::VectorXd(Eigen::Vector2d(0.5 * std::sin(2 * p.x()) * std::cos(p.y()), p.x() * p.y() * p.y()));
  };
  auto dfn = [](const Vec2& p) {
    GradientMatrix z(2, 2);
    z << std::cos(2 * p.x()) * std::cos(p.y()), -0.5 * std::sin(2 * p.x()) * std::sin(p.y()), p.y() * p.y(),
        2 * p.x() * p.y();
    return z;
  };
  const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                        0.2369268850561891};
  double exact = 0;
  const int cells = 16;
  for (int ci = 0; ci < cells; ++ci)
    for (int cj = 0; cj < cells; ++cj)
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) {
          const Vec2 p((ci + 0.5 + 0.5 * xg[a]) / cells, (cj + 0.5 + 0.5 * xg[b]) / cells);
          exact += wg[a] * wg[b] * matcore::area(dfn(p)) / (4.0 * cells * cells);
        }
  std::vector<double> err;
  for (int c : {8, 16, 32, 64}) err.push_back(std::abs(assemble_energy(sample_map(square(c), 2, fn)) - exact));
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GT(err[k - 1] / err[k], 1.8);
  EXPECT_LT(err.back(), 1e-3);
}

TEST(Gradient, MatchesCentralDifferences) {
  auto m = disc(3);
  const auto u = random_map(m, 3, 7, 0.8);
  const Eigen::MatrixXd g = assemble_gradient(u);
  const double h = 1e-6;
  for (int i : m->interior_nodes()) {
    for (int c = 0; c < 3; ++c) {
      DiscreteMap up = u, dn = u;
      up.values(i, c) += h;
      dn.values(i, c) -= h;
      const double fd = (assemble_energy(up) - assemble_energy(dn)) / (2 * h);
      EXPECT_NEAR(g(i, c), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
  for (int i : m->boundary_nodes()) EXPECT_EQ(g.row(i).norm(), 0.0);
}

TEST(Gradient, ZeroMapHasZeroGradient) {
  EXPECT_EQ(assemble_gradient(DiscreteMap(disc(3), Eigen::MatrixXd::Zero(37, 2))).norm(), 0.0);
}

TEST(EnergyDifference, MatchesDirectDifference) {
  auto m = disc(4);
  const auto u = random_map(m, 3, 3, 1.0);
  const auto step = random_map(m, 3, 4, 1.0).values;
  for (double s : {1.0, 1e-3, 1e-8}) {
    DiscreteMap v = u;
    v.values += s * step;
    const double direct = assemble_energy(v) - assemble_energy(u);
    EXPECT_NEAR(energy_difference(u, s * step), direct, 1e-12 * assemble_energy(u));
  }
}

TEST(Invariance, FrameRotationOfValues) {
  auto m = disc(4);
  const auto u = random_map(m, 3, 11, 0.7);
  Rng rng(5);
  const Eigen::MatrixXd N = random_orthogonal(3, rng);
  DiscreteMap v(m, u.values * N.transpose());
  EXPECT_NEAR(assemble_energy(v), assemble_energy(u), 1e-12);
  EXPECT_NEAR((assemble_gradient(v) - assemble_gradient(u) * N.transpose()).norm(), 0.0, 1e-12);
}

TEST(Invariance, DomainRotation) {
  const Mesh base = Mesh::unit_square(6);
  const Mat2 R = rotation(0.7);
  auto rotated = std::make_shared<const Mesh>(base.transformed(R));
  const auto u = random_map(std::make_shared<const Mesh>(base), 2, 2, 0.5);
  EXPECT_NEAR(assemble_energy(DiscreteMap(rotated, u.values)), assemble_energy(u), 1e-12);
}

TEST(SmallDet, HolomorphicSquare) {
  // Boundary triangles sit inside the disc, so the discrete maximum approaches 4 at O(h).
  double prev_gap = 1.0;
  for (int rings : {8, 16, 32, 64}) {
    const double gap = 4.0 - small_det_check(holo_z2(disc(rings), 1.0), 4.0).max_minor;
    EXPECT_GE(gap, 0.0);
    EXPECT_LT(gap, 0.6 * prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.04);
  auto m = disc(16);
  const auto r = small_det_check(holo_z2(m, 1.0), 4.0);
  EXPECT_TRUE(r.pass);
  const auto s = small_det_check(holo_z2(m, 0.1), 0.01);
  EXPECT_NEAR(s.max_minor, r.max_minor / 100, 1e-12);
  EXPECT_FALSE(s.pass);
}

TEST(SmallDet, RankOneIsZero) {
  auto m = disc(4);
  const auto u = sample_map(m, 3, [](const Vec2& p) {
    const double s = 0.3 * p.x() - 2 * p.y();
    return Eigen::VectorXd(Eigen::Vector3d(s, -s, 4 * s));
  });
  EXPECT_NEAR(small_det_check(u, 0.0).max_minor, 0.0, 1e-13);
}

TEST(Config, ValidationRejectsBadParameters) {
  SolveConfig c;
  c.tolerance = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SolveConfig{};
  c.backtrack = 1.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_THROW(boundary_preset("nope", 2), InvalidInput);
}

TEST(Minimize, AffineDataIsImmediatelyCritical) {
  auto m = disc(6);
  const auto b = sample_boundary(*m, 3, boundary_preset("affine", 3, 1.5));
  const auto r = minimize(b, SolveConfig{}, m);
  EXPECT_EQ(r.iterations, 0);
  const auto exact = sample_map(m, 3, boundary_preset("affine", 3, 1.5));
  EXPECT_NEAR((r.map.values - exact.values).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(Minimize, ConvergesMonotonicallyAndKeepsBoundary) {
  auto m = disc(8);
  const auto b = sample_boundary(*m, 2, boundary_preset("holo-z2", 2, 0.25));
  SolveConfig cfg;
  cfg.initializer = Initializer::kBoundaryOnly;
  const auto r = minimize(b, cfg, m);
  EXPECT_LE(r.gradient_norm, cfg.tolerance * std::sqrt(m->interior_nodes().size()));
  for (std::size_t k = 1; k < r.energy_history.size(); ++k) EXPECT_LE(r.energy_history[k], r.energy_history[k - 1]);
  EXPECT_NEAR(r.energy, assemble_energy(r.map), 1e-10);
  const auto bn = m->boundary_nodes();
  for (std::size_t k = 0; k < bn.size(); ++k) EXPECT_EQ(r.map.values.row(bn[k]), b.row(k));

  const auto again = minimize(b, cfg, m);
  EXPECT_EQ(again.map.values, r.map.values);
}

TEST(Minimize, IterationLimitCarriesLastIterate) {
  auto m = disc(6);
  const auto b = sample_boundary(*m, 2, boundary_preset("paraboloid", 2, 1.0));
  SolveConfig cfg;
  cfg.max_iterations = 1;
  cfg.initializer = Initializer::kBoundaryOnly;
  try {
    minimize(b, cfg, m);
    FAIL() << "expected MinimizeError";
  } catch (const MinimizeError& e) {
    EXPECT_EQ(e.last().iterations, 1);
    EXPECT_FALSE(e.history().empty());
  }
}

TEST(Minimize, RejectsBadBoundary) {
  auto m = disc(3);
  EXPECT_THROW(minimize(Eigen::MatrixXd::Zero(5, 2), SolveConfig{}, m), InvalidInput);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(18, 1);
  b(0, 0) = INFINITY;
  EXPECT_THROW(minimize(b, SolveConfig{}, m), InvalidInput);
}

TEST(Minimize, ScalarCaseMatchesNewtonOracle) {
  auto m = square(12);
  auto fn = [](const Vec2& p) { return Eigen::VectorXd::Constant(1, 0.2 * std::sin(3 * p.x()) * p.y()); };
  const auto b = sample_boundary(*m, 1, fn);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(m->num_nodes());
  const auto bn = m->boundary_nodes();
  for (std::size_t k = 0; k < bn.size(); ++k) full(bn[k]) = b(k, 0);
  const Eigen::VectorXd ref = scalar_newton(*m, full);
  SolveConfig cfg;
  cfg.tolerance = 1e-12;
  const auto r = minimize(b, cfg, m);
  EXPECT_LT((r.map.values.col(0) - ref).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Residuals, RefinementDecreaseForHolomorphicData) {
  std::vector<double> outer, inner;
  for (int rings : {4, 8, 16}) {
    auto m = disc(rings);
    const auto r = minimize(sample_boundary(*m, 2, boundary_preset("holo-z2", 2, 0.25)), SolveConfig{}, m);
    outer.push_back(outer_variation_residual_refined(r.map));
    inner.push_back(inner_variation_residual_refined(r.map));
    EXPECT_LT(outer_variation_residual(r.map), 1e-8);
  }
  for (std::size_t k = 1; k < outer.size(); ++k) {
    EXPECT_GT(outer[k - 1] / outer[k], 1.5);
    EXPECT_GT(inner[k - 1] / inner[k], 1.5);
  }
}

TEST(Residuals, PerturbedMapStaysAwayFromZero) {
  std::vector<double> inner;
  for (int rings : {4, 8, 16}) {
    auto m = disc(rings);
    auto u = sample_map(m, 2, [](const Vec2& p) {
      const double bump = (1 - p.squaredNorm()) * 0.3;
      return Eigen::VectorXd(Eigen::Vector2d(0.25 * (p.x() * p.x() - p.y() * p.y()) + bump * p.x(),
                                             0.5 * p.x() * p.y() + bump));
    });
    inner.push_back(inner_variation_residual(u));
  }
  for (double r : inner) EXPECT_GT(r, 0.5 * inner.front());
}

TEST(Prolong, ExactOnRefinedMesh) {
  auto m = disc(3);
  const auto u = random_map(m, 2, 9, 1.0);
  const auto p = prolong(u);
  EXPECT_EQ(p.mesh->num_triangles(), 4 * m->num_triangles());
  EXPECT_NEAR(assemble_energy(p), assemble_energy(u), 1e-12);
}

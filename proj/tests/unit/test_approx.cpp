#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "regext/approx.hpp"
#include "regext/lp.hpp"

using namespace regext;

namespace {

Grid line(double lo, double hi, int cells) { return Grid(1, {cells, 1, 1}, {lo, 0, 0}, (hi - lo) / cells); }

GridFunction sample(const Grid& g, double (*fn)(const Point&)) {
  GridFunction f(g);
  for (std::size_t c = 0; c < g.size(); ++c) f[c] = fn(g.center(c));
  return f;
}

std::vector<std::uint32_t> as_cells(const CellSet& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t c : s.indices()) out.push_back(static_cast<std::uint32_t>(c));
  return out;
}

// Independent dense least squares in raw monomials.
Eigen::VectorXd dense_lsq(const Grid& g, const GridFunction& f, const std::vector<std::uint32_t>& cells, int k) {
  Eigen::MatrixXd v(cells.size(), k);
  Eigen::VectorXd y(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double x = g.center(cells[i])[0];
    for (int j = 0; j < k; ++j) v(i, j) = std::pow(x, j);
    y[i] = f[cells[i]];
  }
  return v.colPivHouseholderQr().solve(y);
}

}  // namespace

TEST(Polynomial, BasisCountsAndEvaluation) {
  EXPECT_EQ(poly_dim(1, 4), 4);
  EXPECT_EQ(poly_dim(2, 3), 6);
  EXPECT_EQ(poly_dim(3, 2), 4);
  EXPECT_EQ(poly_dim(2, 0), 0);
  EXPECT_EQ(multi_indices(2, 3).size(), 6u);
  Polynomial p(2, 3, {1.0, -1.0, 0}, 2.0);
  p.coeffs = {1, 2, 3, 4, 5, 6};  // 1 + 2u + 3v + 4u^2 + 5uv + 6v^2
  const double u = (0.5 - 1.0) / 2.0, v = (0.25 + 1.0) / 2.0;
  EXPECT_NEAR(p({0.5, 0.25, 0}), 1 + 2 * u + 3 * v + 4 * u * u + 5 * u * v + 6 * v * v, 1e-14);
  const Polynomial q = p.rebased({0.0, 0.0, 0.0}, 1.0);
  EXPECT_NEAR(q({0.3, -0.7, 0}), p({0.3, -0.7, 0}), 1e-12);
  EXPECT_TRUE(Polynomial(2, 0)({1, 1, 0}) == 0.0);
}

TEST(Lp, SmallKnownProgram) {
  // max x + y s.t. x + 2y + s = 4, x <= 3, y <= 5 -> x = 3, y = 0.5
  LinearProgram lp;
  lp.rows = 1;
  lp.cols = 3;
  lp.a = {1, 2, 1};
  lp.b = {4};
  lp.c = {1, 1, 0};
  lp.upper = {3, 5, kInf};
  const auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpSolution::Status::optimal);
  EXPECT_NEAR(s.objective, 3.5, 1e-12);
  EXPECT_NEAR(s.y[0], 3.0, 1e-12);
  EXPECT_NEAR(s.y[1], 0.5, 1e-12);
  lp.b = {-1};
  EXPECT_EQ(solve_lp(lp).status, LpSolution::Status::infeasible);
}

TEST(Projector, ReproducesPolynomials) {
  std::mt19937 rng(1);
  std::normal_distribution<double> N;
  std::bernoulli_distribution B(0.4);
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= 4; ++k) {
      Grid g(n, {20, 20, 20}, {-0.3, 0.1, 0.2}, 0.05);
      Polynomial q(n, k, {0.2, 0.4, 0.5}, 0.7);
      for (auto& c : q.coeffs) c = N(rng);
      GridFunction f(g);
      CellSet a(g);
      for (std::size_t c = 0; c < g.size(); ++c) {
        f[c] = q(g.center(c));
        a.set(c, B(rng));
      }
      const auto r = projector(f, a, k);
      EXPECT_FALSE(r.deficient);
      double err = 0, scale = 0;
      for (std::size_t c = 0; c < g.size(); ++c) {
        err = std::max(err, std::abs(r.poly(g.center(c)) - f[c]));
        scale = std::max(scale, std::abs(f[c]));
      }
      EXPECT_LE(err, 1e-8 * scale) << n << " " << k;
    }
}

TEST(Projector, ConstantIsMeanAndLinear) {
  const Grid g = line(0.0, 1.0, 50);
  std::mt19937 rng(2);
  std::normal_distribution<double> N;
  GridFunction f(g), h(g);
  for (std::size_t c = 0; c < g.size(); ++c) {
    f[c] = N(rng);
    h[c] = N(rng);
  }
  CellSet a(g);
  for (std::size_t c = 5; c < 30; c += 2) a.set(c);
  double mean = 0;
  for (std::size_t c : a.indices()) mean += f[c];
  mean /= a.count();
  EXPECT_NEAR(projector(f, a, 1).poly({0.3, 0, 0}), mean, 1e-14);
  GridFunction mix(g);
  for (std::size_t c = 0; c < g.size(); ++c) mix[c] = 2 * f[c] - 3 * h[c];
  const auto pf = projector(f, a, 3).poly, ph = projector(h, a, 3).poly, pm = projector(mix, a, 3).poly;
  for (double x : {0.0, 0.33, 0.9}) EXPECT_NEAR(pm({x, 0, 0}), 2 * pf({x, 0, 0}) - 3 * ph({x, 0, 0}), 1e-10);
}

TEST(Projector, QuadraticOnSymmetricIntervalMatchesDenseOracle) {
  const Grid g = line(-1.0, 1.0, 2000);
  const auto f = sample(g, [](const Point& x) { return x[0] * x[0]; });
  const auto cells = as_cells(CellSet(g, true));
  const auto r = projector(f, cells, 2);
  const auto oracle = dense_lsq(g, f, cells, 2);
  EXPECT_NEAR(r.poly({0.0, 0, 0}), oracle[0], 1e-12);
  EXPECT_NEAR(r.poly({0.0, 0, 0}), 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(r.poly({1.0, 0, 0}) - r.poly({0.0, 0, 0}), oracle[1], 1e-12);
}

TEST(Projector, RankDeficiencyAndEmpty) {
  Grid g(2, {8, 8, 1}, {}, 0.125);
  CellSet row(g);
  for (int j = 0; j < 8; ++j) row.set(g.flat({3, j, 0}));
  const auto r = projector(GridFunction(g, 1.0), row, 2);
  EXPECT_TRUE(r.deficient);
  EXPECT_EQ(r.rank, 2);
  EXPECT_NEAR(r.poly(g.center(g.flat({3, 4, 0}))), 1.0, 1e-12);
  EXPECT_TRUE(projector(GridFunction(g, 1.0), CellSet(g), 2).empty);
}

TEST(BestApprox, ChebyshevLineForParabola) {
  const Grid g = line(-1.0, 1.0, 400);
  const auto f = sample(g, [](const Point& x) { return x[0] * x[0]; });
  const auto cells = as_cells(CellSet(g, true));
  const auto r = local_best_approx(f, cells, 2, kInf, ApproxMode::exact);
  // extreme samples sit at x = +-(1 - h/2) and x = +-h/2
  const double xm = 1.0 - g.h() / 2, x0 = g.h() / 2;
  EXPECT_NEAR(r.value, (xm * xm - x0 * x0) / 2, 1e-9);
  // brute force over (slope, intercept)
  double best = kInf;
  for (int i = -40; i <= 40; ++i)
    for (int j = 0; j <= 100; ++j) {
      const double a = i * 0.005, b = j * 0.01;
      double e = 0;
      for (auto c : cells) e = std::max(e, std::abs(f[c] - a * g.center(c)[0] - b));
      best = std::min(best, e);
    }
  EXPECT_LE(r.value, best + 1e-12);
  EXPECT_NEAR(r.value, best, 5e-3);
}

TEST(BestApprox, StepFunctionAndPolynomials) {
  const Grid g = line(0.0, 1.0, 1000);
  const auto step = sample(g, [](const Point& x) { return x[0] <= 0.5 ? 1.0 : 0.0; });
  const auto all = as_cells(CellSet(g, true));
  EXPECT_NEAR(local_best_approx(step, all, 1, 2.0).value, 0.5, 1e-12);
  const auto cubic = sample(g, [](const Point& x) { return 1 - x[0] + 2 * x[0] * x[0] * x[0]; });
  for (double u : {1.0, 2.0, kInf})
    for (auto mode : {ApproxMode::fast, ApproxMode::exact})
      EXPECT_NEAR(local_best_approx(cubic, all, 4, u, mode).value, 0.0, 1e-9);
  EXPECT_EQ(local_best_approx(cubic, std::vector<std::uint32_t>{}, 2, 1.0).value, 0.0);
}

TEST(BestApprox, ExactModeIsOptimalAndMonotoneInK) {
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  Grid g(2, {12, 12, 1}, {}, 1.0 / 12);
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction f(g);
    for (auto& v : f.values()) v = N(rng);
    const auto cells = as_cells(cube_cells(g, Cube{{0.5, 0.5, 0}, 0.3}));
    for (double u : {1.0, kInf}) {
      double prev = kInf;
      for (int k = 1; k <= 3; ++k) {
        const double ex = local_best_approx(f, cells, k, u, ApproxMode::exact).value;
        const double fast = local_best_approx(f, cells, k, u, ApproxMode::fast).value;
        EXPECT_LE(ex, fast * (1 + 1e-9));
        EXPECT_LE(fast, 10 * ex);
        EXPECT_LE(ex, prev * (1 + 1e-9));
        prev = ex;
      }
    }
  }
}

TEST(NormalizedApprox, LinearOnBoxAndEmpty) {
  const Grid g = line(-2.0, 2.0, 4000);
  const auto f = sample(g, [](const Point& x) { return x[0]; });
  const CellSet box(g, true);
  for (double r : {0.1, 0.25, 0.8}) {
    const Cube q{{0.3 + g.h() / 2, 0, 0}, r};
    EXPECT_NEAR(normalized_local_approx(f, q, box, 1, 1.0), r / 2, 2e-3);
  }
  EXPECT_EQ(normalized_local_approx(f, Cube{{9.0, 0, 0}, 0.1}, box, 1, 1.0), 0.0);
}

TEST(NormalizedApprox, NestedCubeProperty) {
  std::mt19937 rng(8);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> U(0.2, 0.8), R(0.05, 0.2);
  Grid g(2, {24, 24, 1}, {}, 1.0 / 24);
  CellSet s(g);
  std::bernoulli_distribution B(0.7);
  for (std::size_t c = 0; c < g.size(); ++c) s.set(c, B(rng));
  GridFunction f(g);
  for (auto& v : f.values()) v = N(rng);
  for (int trial = 0; trial < 15; ++trial) {
    const Cube q2{{U(rng), U(rng), 0}, R(rng) + 0.1};
    const Cube q1{{q2.center[0] + 0.02, q2.center[1] - 0.01, 0}, q2.radius - 0.05};
    for (double u : {1.0, 2.0, kInf}) {
      const double ratio = std::isinf(u) ? 1.0 : std::pow(q2.volume(2) / q1.volume(2), 1.0 / u);
      EXPECT_LE(normalized_local_approx(f, q1, s, 2, u, ApproxMode::exact),
                ratio * normalized_local_approx(f, q2, s, 2, u, ApproxMode::exact) * (1 + 1e-9));
    }
  }
}

TEST(CubeFitErrors, MatchesProjectorPath) {
  std::mt19937 rng(9);
  std::normal_distribution<double> N;
  Grid g(2, {20, 20, 1}, {}, 0.05);
  GridFunction f(g);
  for (auto& v : f.values()) v = N(rng);
  const Cube q{{0.5, 0.4, 0}, 0.22};
  const CellSet s = cube_cells(g, Cube{{0.3, 0.3, 0}, 0.3});
  FitWorkspace ws;
  const auto e = cube_fit_errors(f, &s, q, 2, 3.0, ws);
  for (double u : {1.0, 2.0, 3.0, kInf})
    EXPECT_NEAR(e.norm(u, 3.0), local_best_approx(f, cube_cells(g, q) & s, 2, u).value, 1e-10);
}

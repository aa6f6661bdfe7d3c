#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "regext/grid.hpp"
#include "regext/prefix_sum.hpp"

using namespace regext;

TEST(Grid, CellCentersAndIndexing) {
  Grid g(2, {3, 4, 1}, {-1.0, 2.0, 0.0}, 0.5);
  EXPECT_EQ(g.size(), 12u);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.25);
  const Point c = g.center(Index{1, 2, 0});
  EXPECT_DOUBLE_EQ(c[0], -0.25);
  EXPECT_DOUBLE_EQ(c[1], 3.25);
  EXPECT_EQ(g.flat(Index{1, 2, 0}), 6u);
  EXPECT_EQ(g.multi(6), (Index{1, 2, 0}));
}

TEST(Grid, RejectsBadParameters) {
  EXPECT_THROW(Grid(0, {1, 1, 1}, {}, 1.0), Error);
  EXPECT_THROW(Grid(4, {1, 1, 1}, {}, 1.0), Error);
  EXPECT_THROW(Grid(1, {0, 1, 1}, {}, 1.0), Error);
  EXPECT_THROW(Grid(1, {4, 1, 1}, {}, 0.0), Error);
}

TEST(CubeCells, OneDimensionalExample) {
  Grid g(1, {10, 1, 1}, {0.0, 0.0, 0.0}, 0.1);
  const auto s = cube_cells(g, Cube{{0.5, 0, 0}, 0.2});
  const auto idx = s.indices();
  ASSERT_EQ(idx.size(), 4u);
  EXPECT_NEAR(g.center(idx.front())[0], 0.35, 1e-12);
  EXPECT_NEAR(g.center(idx.back())[0], 0.65, 1e-12);
}

TEST(CubeCells, TinyCubeAtCenterAndOutsideBox) {
  Grid g(2, {8, 8, 1}, {0.0, 0.0, 0.0}, 0.125);
  const Point c = g.center(Index{3, 5, 0});
  EXPECT_EQ(cube_cells(g, Cube{c, 0.01}).count(), 1u);
  EXPECT_EQ(cube_cells(g, Cube{{5.0, 5.0, 0.0}, 1.0}).count(), 0u);
}

TEST(CubeCells, NestedCubesAreMonotone) {
  Grid g(2, {64, 64, 1}, {0.0, 0.0, 0.0}, 1.0 / 64);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.2, 1.2), R(0.0, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Point x{U(rng), U(rng), 0.0};
    const double r1 = R(rng), r2 = r1 + R(rng);
    EXPECT_TRUE(cube_cells(g, Cube{x, r1}).subset_of(cube_cells(g, Cube{x, r2})));
  }
}

TEST(Measure, FullEmptyAndCentralCube) {
  Grid g(2, {10, 10, 1}, {0.0, 0.0, 0.0}, 0.1);
  EXPECT_NEAR(measure(CellSet(g, true)), 1.0, 1e-12);
  EXPECT_EQ(measure(CellSet(g)), 0.0);
  for (int n = 1; n <= 2; ++n) {
    Grid u(n, {256, 256, 1}, {0.0, 0.0, 0.0}, 1.0 / 256);
    const double m = measure(cube_cells(u, Cube{{0.5, 0.5, 0.5}, 0.25}));
    EXPECT_NEAR(m, std::pow(0.5, n), 2 * n * u.h());
  }
}

TEST(Measure, AdditiveOverDisjointSets) {
  Grid g(1, {100, 1, 1}, {0.0, 0.0, 0.0}, 0.01);
  const auto a = cube_cells(g, Cube{{0.2, 0, 0}, 0.1});
  const auto b = cube_cells(g, Cube{{0.7, 0, 0}, 0.1});
  EXPECT_NEAR(measure(a | b), measure(a) + measure(b), 1e-12);
  EXPECT_EQ((a & b).count(), 0u);
  EXPECT_EQ(((a | b) - a), b);
  EXPECT_EQ(a.complement().complement(), a);
}

TEST(LuNorm, Examples) {
  Grid g(1, {1000, 1, 1}, {0.0, 0.0, 0.0}, 1e-3);
  CellSet half(g);
  for (std::size_t i = 0; i < 500; ++i) half.set(i);
  EXPECT_NEAR(lu_norm(GridFunction(g, 1.0), half, 2.0), std::sqrt(0.5), 1e-12);
  EXPECT_DOUBLE_EQ(lu_norm(GridFunction(g, -3.0), half, kInf), 3.0);
  GridFunction x(g);
  for (std::size_t i = 0; i < g.size(); ++i) x[i] = g.center(i)[0];
  EXPECT_NEAR(lu_norm(x, CellSet(g, true), 1.0), 0.5, 1e-3);
  EXPECT_EQ(lu_norm(x, CellSet(g), 1.0), 0.0);
  EXPECT_EQ(lu_norm(x, CellSet(g), kInf), 0.0);
}

TEST(LuNorm, HolderAndMonotone) {
  Grid g(2, {32, 32, 1}, {0.0, 0.0, 0.0}, 1.0 / 32);
  std::mt19937 rng(3);
  std::normal_distribution<double> N;
  GridFunction f(g);
  for (auto& v : f.values()) v = N(rng);
  const auto a = cube_cells(g, Cube{{0.4, 0.4, 0}, 0.2});
  const auto b = cube_cells(g, Cube{{0.4, 0.4, 0}, 0.3});
  const double us[] = {1.0, 1.5, 2.0, 4.0, kInf};
  for (double u1 : us)
    for (double u2 : us) {
      if (u1 > u2) continue;
      const double e = (std::isinf(u1) ? 0.0 : 1.0 / u1) - (std::isinf(u2) ? 0.0 : 1.0 / u2);
      EXPECT_LE(lu_norm(f, a, u1), std::pow(measure(a), e) * lu_norm(f, a, u2) * (1 + 1e-12));
    }
  for (double u : us) EXPECT_LE(lu_norm(f, a, u), lu_norm(f, b, u));
}

TEST(GridFunction, RequireFinite) {
  Grid g(1, {4, 1, 1}, {}, 1.0);
  GridFunction f(g, 1.0);
  EXPECT_NO_THROW(f.require_finite());
  f[2] = std::nan("");
  EXPECT_THROW(f.require_finite(), Error);
}

TEST(PrefixSum, MatchesDirectSums) {
  Grid g(3, {5, 6, 7}, {}, 1.0);
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> V(0, 9);
  std::vector<long> vals(g.size());
  for (auto& v : vals) v = V(rng);
  PrefixSum<long> ps(g, [&](std::size_t f) { return vals[f]; });
  for (int trial = 0; trial < 100; ++trial) {
    Index lo{V(rng) % 5, V(rng) % 6, V(rng) % 7};
    Index hi{lo[0] + V(rng) % (5 - lo[0]), lo[1] + V(rng) % (6 - lo[1]), lo[2] + V(rng) % (7 - lo[2])};
    long direct = 0;
    for (int a = lo[0]; a <= hi[0]; ++a)
      for (int b = lo[1]; b <= hi[1]; ++b)
        for (int c = lo[2]; c <= hi[2]; ++c) direct += vals[g.flat({a, b, c})];
    EXPECT_EQ(ps.sum(lo, hi), direct);
  }
}

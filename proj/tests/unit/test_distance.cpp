#include <gtest/gtest.h>

#include <random>

#include "regext/distance.hpp"

using namespace regext;

namespace {

NearestResult brute_nearest(const CellSet& s, const Point& x) {
  const Grid& g = s.grid();
  NearestResult best;
  best.distance = kInf;
  double best_e2 = kInf;
  const double tol = 1e-12 * g.h();
  for (std::size_t f : s.indices()) {
    const Point c = g.center(f);
    const double d = sup_dist(c, x, g.n());
    double e2 = 0.0;
    for (int i = 0; i < g.n(); ++i) e2 += (c[i] - x[i]) * (c[i] - x[i]);
    // indices ascend lexicographically, so strict improvement keeps the first tie
    if (d < best.distance - tol || (d <= best.distance + tol && e2 < best_e2 - tol * tol)) {
      best = {f, c, d};
      best_e2 = e2;
    }
  }
  return best;
}

CellSet random_set(const Grid& g, double p, unsigned seed) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution B(p);
  CellSet s(g);
  for (std::size_t i = 0; i < g.size(); ++i) s.set(i, B(rng));
  if (s.empty()) s.set(0);
  return s;
}

}  // namespace

TEST(DistanceField, CellInSetIsZero) {
  Grid g(2, {8, 8, 1}, {}, 1.0);
  const auto s = random_set(g, 0.3, 1);
  const auto d = distance_field(s);
  for (std::size_t f : s.indices()) EXPECT_EQ(d[f], 0.0);
}

TEST(DistanceField, SingleCellUniformNorm) {
  // S = cell centred at the origin; query center (0.3, 0.4)
  Grid g(2, {21, 21, 1}, {-1.05, -1.05, 0.0}, 0.1);
  CellSet s(g);
  s.set(g.flat({10, 10, 0}));
  const auto d = distance_field(s);
  EXPECT_NEAR(d[g.flat({13, 14, 0})], 0.4, 1e-12);
}

TEST(DistanceField, MatchesExhaustiveScan) {
  for (int n = 1; n <= 3; ++n) {
    Grid g(n, {17, 13, 9}, {}, 0.5);
    const auto s = random_set(g, 0.02, 10 + n);
    const auto d = distance_field(s);
    for (std::size_t f = 0; f < g.size(); ++f) EXPECT_NEAR(d[f], brute_nearest(s, g.center(f)).distance, 1e-12);
  }
}

TEST(Nearest, MatchesExhaustiveScanAtArbitraryPoints) {
  std::mt19937 rng(99);
  for (int n = 1; n <= 3; ++n) {
    Grid g(n, {23, 19, 11}, {-1.0, -2.0, 0.0}, 0.25);
    for (double p : {0.003, 0.05, 0.5}) {
      const auto s = random_set(g, p, 17 * n);
      NearestIndex idx(s);
      std::uniform_real_distribution<double> U(-4.0, 8.0);
      for (int trial = 0; trial < 300; ++trial) {
        Point x{U(rng), U(rng), U(rng)};
        // snap some queries onto half-cell lattice points to force ties
        if (trial % 3 == 0)
          for (auto& xi : x) xi = std::round(xi * 8.0) / 8.0;
        const auto a = idx.nearest(x);
        const auto b = brute_nearest(s, x);
        EXPECT_EQ(a.cell, b.cell);
        EXPECT_NEAR(a.distance, b.distance, 1e-12);
      }
    }
  }
}

TEST(Nearest, HalfLineProjection) {
  Grid g(1, {400, 1, 1}, {-2.0, 0.0, 0.0}, 0.01);
  CellSet s(g);
  for (std::size_t f = 0; f < g.size(); ++f)
    if (g.center(f)[0] >= 0) s.set(f);
  NearestIndex idx(s);
  const auto r = idx.nearest({-1.5, 0, 0});
  EXPECT_NEAR(r.point[0], 0.005, 1e-12);
  const auto inside = idx.nearest({0.733, 0, 0});
  EXPECT_LE(inside.distance, g.h() / 2 + 1e-15);
}

TEST(Nearest, EmptySetThrows) {
  Grid g(1, {4, 1, 1}, {}, 1.0);
  EXPECT_THROW(NearestIndex(CellSet(g)), Error);
  EXPECT_EQ(chessboard_distance(CellSet(g))[0], -1);
}

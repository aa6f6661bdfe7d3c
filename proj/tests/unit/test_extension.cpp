#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "regext/extension.hpp"

using namespace regext;

namespace {

RegularSet square_set(int cells) {
  Grid g(2, {cells, cells, 1}, {-0.5, -0.5, 0}, 2.0 / cells);
  SetSpec spec;
  return generate_set(spec, g);
}

}  // namespace

TEST(Extension, ReproducesPolynomialsNearS) {
  const auto s = square_set(96);
  const Grid& g = s.grid();
  std::mt19937 rng(1);
  std::normal_distribution<double> N;
  for (int k = 1; k <= 4; ++k) {
    ExtensionOperator op(s, k);
    Polynomial q(2, k, {0.5, 0.5, 0}, 1.0);
    for (auto& c : q.coeffs) c = N(rng);
    GridFunction f(g);
    for (std::size_t c = 0; c < g.size(); ++c) f[c] = s.cells.contains(c) ? q(g.center(c)) : 1e6;
    const auto e = extend(f, op);
    double err = 0, scale = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (op.whitney().dist()[c] > s.delta / 2) continue;
      const double v = q(g.center(c));
      err = std::max(err, std::abs(e.values[c] - v));
      scale = std::max(scale, std::abs(v));
    }
    EXPECT_LE(err, 1e-8 * scale) << "k=" << k;
  }
}

TEST(Extension, IdentityOnSAndLinear) {
  const auto s = square_set(64);
  const Grid& g = s.grid();
  ExtensionOperator op(s, 2);
  std::mt19937 rng(2);
  std::normal_distribution<double> N;
  GridFunction f(g), h(g), mix(g);
  for (std::size_t c = 0; c < g.size(); ++c) {
    f[c] = N(rng);
    h[c] = N(rng);
    mix[c] = 0.5 * f[c] + 4 * h[c];
  }
  const auto ef = extend(f, op).values, eh = extend(h, op).values, em = extend(mix, op).values;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (s.cells.contains(c)) EXPECT_EQ(ef[c], f[c]);
    EXPECT_NEAR(em[c], 0.5 * ef[c] + 4 * eh[c], 1e-10 * (1 + std::abs(em[c])));
  }
}

TEST(Extension, FarZoneVanishes) {
  Grid g(1, {4096, 1, 1}, {-4.0, 0, 0}, 1.0 / 512);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  auto s = generate_set(spec, g);
  s.delta = 16 * g.h();
  ExtensionOperator op(s, 1);
  const auto e = extend(GridFunction(g, 3.0), op).values;
  std::size_t far = 0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double d = op.whitney().dist()[c];
    if (d <= s.delta / 2) EXPECT_NEAR(e[c], 3.0, 1e-12);
    if (d > 5 * s.delta) {
      ++far;
      EXPECT_EQ(e[c], 0.0);
    }
  }
  EXPECT_GT(far, 0u);
}

TEST(Extension, NormCheck) {
  const auto s = square_set(64);
  const Grid& g = s.grid();
  ExtensionOperator op(s, 1);
  const GridFunction zero(g, 0.0), one(g, 1.0);
  const Cube k{g.center(g.flat(g.locate({0.5, 0.5, 0}))), 0.05};
  auto r = extend_norm_check(zero, extend(zero, op).values, s, k, 2.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  r = extend_norm_check(one, extend(one, op).values, s, k, 2.0);
  EXPECT_NEAR(r.lhs, std::sqrt(measure(cube_cells(g, k))), 1e-12);
  EXPECT_NEAR(r.rhs, std::sqrt(measure(cube_cells(g, k.scale(25)) & s.cells)), 1e-12);
  EXPECT_TRUE(extend_norm_check(one, one, s, Cube{{1.4, 1.4, 0}, 0.2}, 1.0).skipped);
  EXPECT_TRUE(extend_norm_check(one, one, s, Cube{{-0.3, -0.3, 0}, 0.1}, 1.0).skipped);
}

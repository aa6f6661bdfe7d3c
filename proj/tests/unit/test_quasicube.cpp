#include <gtest/gtest.h>

#include "regext/quasicube.hpp"

using namespace regext;

namespace {

RegularSet half_line(int cells, double lo, double hi) {
  Grid g(1, {cells, 1, 1}, {lo, 0, 0}, (hi - lo) / cells);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  return generate_set(spec, g);
}

}  // namespace

TEST(QuasiCube, DefaultEpsilonFormula) {
  EXPECT_NEAR(default_epsilon(2.0, 1, 1.0), 1.0 / 48, 1e-15);
  EXPECT_NEAR(default_epsilon(1.0, 1, 1.0), 1.0 / 24, 1e-15);
  EXPECT_NEAR(default_epsilon(1.0, 2, 1.0), 1.0 / std::sqrt(288.0), 1e-15);
  EXPECT_LE(default_epsilon(1.0, 3, 1.0), 1.0);
  EXPECT_THROW(default_epsilon(0.5, 1), Error);
}

TEST(QuasiCube, HalfLineReflection) {
  const auto s = half_line(8192, -4.0, 4.0);
  const double eps = 1.0 / 48;
  WhitneyOptions wo;
  wo.min_radius = s.grid().h() / eps;
  const auto w = whitney_decompose(s, wo);
  const auto h = build_quasicubes(s, w, eps);
  EXPECT_TRUE(h.valid());
  EXPECT_EQ(h.inclusion_violations, 0u);
  const std::size_t q = w.containing({-1.5, 0, 0}, false).front();
  const double r = w[q].cube.radius;
  ASSERT_FALSE(h[q].empty());
  for (auto c : h[q]) {
    const double x = s.grid().center(c)[0];
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, eps * r + s.grid().h());
  }
  EXPECT_LT(w[q].cube.volume(1) / (h[q].size() * s.grid().h()), h.gamma1 * (1 + 1e-12));
}

TEST(QuasiCube, InvariantsOnTwoDimensionalSets) {
  Grid g(2, {128, 128, 1}, {-0.5, -0.5, 0}, 1.0 / 64);
  for (auto kind : {SetKind::box, SetKind::fat_carpet, SetKind::lipschitz_subgraph}) {
    SetSpec spec;
    spec.kind = kind;
    spec.splits = {3};
    const auto s = generate_set(spec, g);
    WhitneyOptions wo;
    wo.min_radius = 2 * g.h() / 0.25;
    const auto w = whitney_decompose(s, wo);
    const auto h = build_quasicubes(s, w, 0.25);
    EXPECT_EQ(h.inclusion_violations, 0u);
    EXPECT_EQ(h.mechanism_violations, 0u);
    EXPECT_TRUE(std::isfinite(h.gamma1));
    EXPECT_GE(h.gamma2, 1);
    for (std::size_t q = 0; q < w.size(); ++q) {
      if (!h.small[q]) {
        EXPECT_TRUE(h[q].empty());
      }
      const Cube ten = w[q].cube.scale(10.0);
      for (auto c : h[q]) {
        EXPECT_TRUE(s.cells.contains(c));
        EXPECT_TRUE(ten.contains(g.center(c), 2, 1e-9));
      }
    }
  }
}

TEST(QuasiCube, LargeCubesGetEmptySets) {
  auto s = half_line(1024, -4.0, 4.0);
  const Grid& g = s.grid();
  s.delta = 8 * g.h();
  WhitneyOptions wo;
  wo.min_radius = g.h() / 0.25;
  const auto w = whitney_decompose(s, wo);
  const auto h = build_quasicubes(s, w, 0.25);
  std::size_t big = 0;
  for (std::size_t q = 0; q < w.size(); ++q)
    if (w[q].cube.diam() > s.delta) {
      ++big;
      EXPECT_TRUE(h[q].empty());
    }
  EXPECT_GT(big, 0u);
}

TEST(QuasiCube, VisibilityPrecondition) {
  const auto s = half_line(1024, -1.0, 1.0);
  const auto w = whitney_decompose(s);  // no floor: sub-cell cubes
  EXPECT_THROW(build_quasicubes(s, w, 0.25), Error);
  EXPECT_THROW(build_quasicubes(s, w, 0.0), Error);
}

TEST(QuasiCube, AutoEpsilon) {
  const auto s = half_line(1024, -1.0, 1.0);
  WhitneyOptions wo;
  wo.min_radius = 2 * s.grid().h() / 0.25;
  const auto w = whitney_decompose(s, wo);
  const auto r = auto_epsilon(s, w, 0.25);
  EXPECT_EQ(r.epsilon, 0.25);
  EXPECT_TRUE(r.family.valid());
  // epsilon = 1 puts Q itself in its own exclusion family, so it is always halved
  const auto r1 = auto_epsilon(s, w, 1.0);
  EXPECT_LT(r1.epsilon, 1.0);
  EXPECT_FALSE(r1.diagnostics.empty());
  EXPECT_GE(r1.epsilon, default_epsilon(s.theta, 1));
}

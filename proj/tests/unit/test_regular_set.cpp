#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "regext/regular_set.hpp"

using namespace regext;

namespace {

Grid line(double lo, double hi, int cells) { return Grid(1, {cells, 1, 1}, {lo, 0, 0}, (hi - lo) / cells); }
Grid square(double lo, double hi, int cells) { return Grid(2, {cells, cells, 1}, {lo, lo, 0}, (hi - lo) / cells); }

// Independent full scan of the regularity ratio.
double brute_theta(const CellSet& s, double delta) {
  const Grid& g = s.grid();
  double worst = 1.0;
  for (std::size_t c : s.indices())
    for (double r : default_regularity_radii(g)) {
      if (r > delta / 2 * (1 + 1e-12)) break;
      const auto q = cube_cells(g, Cube{g.center(c), r});
      worst = std::max(worst, static_cast<double>(q.count()) / (q & s).count());
    }
  return worst;
}

}  // namespace

TEST(Rasterize, BoxInsideLargerBox) {
  const Grid g = square(-1.0, 2.0, 48);
  SetSpec spec;
  const auto s = rasterize(spec, g);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Point c = g.center(f);
    EXPECT_EQ(s.contains(f), c[0] >= 0 && c[0] <= 1 && c[1] >= 0 && c[1] <= 1);
  }
  EXPECT_NEAR(measure(s), spec.nominal_measure(g), 1e-12);
}

TEST(Rasterize, HalfSpace) {
  const Grid g = square(-1.0, 1.0, 40);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  const auto s = rasterize(spec, g);
  for (std::size_t f = 0; f < g.size(); ++f) EXPECT_EQ(s.contains(f), g.center(f)[0] >= 0);
  EXPECT_NEAR(measure(s), spec.nominal_measure(g), 1e-12);
}

TEST(Rasterize, FatCantorMeasureBookkeeping) {
  const Grid g = line(0.0, 1.0, 4096);  // h = 4^-6
  SetSpec spec;
  spec.kind = SetKind::fat_cantor;
  for (int gens : {4, 6}) {
    spec.generations = gens;
    const auto s = rasterize(spec, g);
    const double nominal = spec.nominal_measure(g);
    EXPECT_NEAR(nominal, 1.0 - (0.5 - std::ldexp(1.0, -gens - 1)), 1e-12);
    EXPECT_NEAR(measure(s), nominal, spec.boundary_pieces() * g.h());
  }
  // six generations need h = 4^-7 for the last gaps to cover cell centers
  spec.generations = 6;
  EXPECT_NEAR(measure(rasterize(spec, line(0.0, 1.0, 16384))), 0.5, 0.01);
}

TEST(Rasterize, FatCarpetMeasure) {
  const Grid g = square(0.0, 1.0, 225);
  SetSpec spec;
  spec.kind = SetKind::fat_carpet;
  const auto s = rasterize(spec, g);
  EXPECT_NEAR(spec.nominal_measure(g), (1 - 1.0 / 9) * (1 - 1.0 / 25), 1e-12);
  EXPECT_NEAR(measure(s), spec.nominal_measure(g), 1e-9);  // pieces align with the grid
}

TEST(Rasterize, LipschitzSubgraphAndUnion) {
  const Grid g = square(-0.5, 1.5, 128);
  SetSpec sub;
  sub.kind = SetKind::lipschitz_subgraph;
  EXPECT_NEAR(measure(rasterize(sub, g)), sub.nominal_measure(g), 0.02);
  SetSpec a, b, u;
  a.lo = {0.0, 0.0, 0.0};
  a.hi = {0.4, 1.0, 0.0};
  b.lo = {0.6, 0.0, 0.0};
  b.hi = {1.0, 1.0, 0.0};
  u.kind = SetKind::union_of;
  u.parts = {a, b};
  EXPECT_EQ(rasterize(u, g), rasterize(a, g) | rasterize(b, g));
}

TEST(Rasterize, InvalidSpecs) {
  const Grid g = line(0.0, 1.0, 64);
  SetSpec spec;
  spec.kind = SetKind::fat_cantor;
  spec.removal = {0.6};
  spec.generations = 1;
  EXPECT_NO_THROW(rasterize(spec, g));
  spec.removal = {0.4, 0.35};
  spec.generations = 2;
  EXPECT_THROW(rasterize(spec, g), Error);
  SetSpec outside;
  outside.lo = {5.0, 0, 0};
  outside.hi = {6.0, 0, 0};
  EXPECT_THROW(generate_set(outside, g), Error);
  EXPECT_EQ(set_kind_from_string(to_string(SetKind::fat_carpet)), SetKind::fat_carpet);
  EXPECT_THROW(set_kind_from_string("blob"), Error);
}

TEST(Regularity, HalfLineTendsToTwo) {
  const Grid g = line(-1.0, 1.0, 1024);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  const auto s = generate_set(spec, g);
  EXPECT_GT(s.theta, 1.9);
  EXPECT_LE(s.theta, 2.0);
  EXPECT_GE(s.delta, 16 * g.h());
}

TEST(Regularity, SquareCornerTendsToFour) {
  // beyond diam S the ratio grows without bound, so cap delta at the side length
  const Grid g = square(-1.0, 2.0, 96);
  SetSpec spec;
  RegularityOptions opts;
  opts.delta_cap = 1.0;
  const auto s = generate_set(spec, g, opts);
  EXPECT_GT(s.theta, 3.3);
  EXPECT_LE(s.theta, 4.0);
}

TEST(Regularity, FullBoxIsOne) {
  const Grid g = square(0.0, 1.0, 32);
  const auto s = make_regular_set(CellSet(g, true));
  EXPECT_DOUBLE_EQ(s.theta, 1.0);
}

TEST(Regularity, DefiningInequalityMatchesFullScan) {
  const Grid g = square(0.0, 1.0, 40);
  std::mt19937 rng(4);
  std::bernoulli_distribution B(0.7);
  CellSet mask(g);
  for (std::size_t i = 0; i < g.size(); ++i) mask.set(i, B(rng));
  const auto est = estimate_regularity(mask, default_regularity_radii(g));
  EXPECT_NEAR(est.theta, brute_theta(mask, est.delta), 1e-12);
  EXPECT_GE(est.delta, 16 * g.h());
}

TEST(Regularity, StrideSubsampling) {
  const Grid g = square(0.0, 1.0, 64);
  RegularityOptions opts;
  opts.max_centers = 1000;
  const auto est = estimate_regularity(CellSet(g, true), default_regularity_radii(g), opts);
  EXPECT_EQ(est.center_stride, 5u);
  EXPECT_LE(est.centers_sampled, 1000u);
  EXPECT_THROW(estimate_regularity(CellSet(g), default_regularity_radii(g)), Error);
}

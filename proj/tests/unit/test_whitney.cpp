#include <gtest/gtest.h>

#include <cmath>

#include "regext/whitney.hpp"

using namespace regext;

namespace {

// S = {0}: one cell centred at the origin of the box [-8, 8].
RegularSet point_set(int cells_per_unit) {
  const double h = 1.0 / cells_per_unit;
  const int dims = 16 * cells_per_unit + 1;
  Grid g(1, {dims, 1, 1}, {-8.0 - h / 2, 0, 0}, h);
  CellSet s(g);
  s.set(g.flat(g.locate({0.0, 0, 0})));
  return make_regular_set(s, {}, 1.0, 1.0);
}

RegularSet spec_set(const SetSpec& spec, const Grid& g) { return generate_set(spec, g); }

void expect_clean(const WhitneyDecomposition& w, const RegularSet& s) {
  const auto c = check_whitney(w, s.cells, 2000);
  EXPECT_EQ(c.uncovered_cells, 0u);
  EXPECT_EQ(c.window_violations, 0u);
  EXPECT_EQ(c.ratio_violations, 0u);
  EXPECT_EQ(c.overlap_violations, 0u);
  EXPECT_LE(c.max_multiplicity, 1 << s.grid().n());
  EXPECT_GE(c.min_dist_ratio, 1.0);
  EXPECT_LE(c.max_dist_ratio, 4.0);
}

}  // namespace

TEST(Whitney, PointSetGeometricLayers) {
  const auto s = point_set(64);
  const auto w = whitney_decompose(s);
  expect_clean(w, s);
  for (const auto& q : w.cubes()) {
    if (q.flagged()) continue;
    const double ratio = q.center_dist / q.cube.diam();
    EXPECT_TRUE(std::abs(ratio - 2.5) < 1e-9 || std::abs(ratio - 3.5) < 1e-9) << ratio;
  }
  // [1, 1.5] touches [0.75, 1] and [1.5, 2]
  const auto nb = neighbors(w, Cube{{1.25, 0, 0}, 0.25});
  std::vector<double> centers;
  for (std::size_t k : nb) centers.push_back(w[k].cube.center[0]);
  EXPECT_NE(std::find(centers.begin(), centers.end(), 0.875), centers.end());
  EXPECT_NE(std::find(centers.begin(), centers.end(), 1.75), centers.end());
  for (std::size_t k : nb) {
    const double r = w[k].cube.radius / 0.25;
    EXPECT_GE(r, 0.25);
    EXPECT_LE(r, 4.0);
  }
  EXPECT_THROW(neighbors(w, Cube{{1.3, 0, 0}, 0.25}), Error);
}

TEST(Whitney, HalfSpaceLayersDoubleWithDistance) {
  Grid g(2, {128, 128, 1}, {-1.0, -1.0, 0}, 1.0 / 64);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  const auto s = spec_set(spec, g);
  const auto w = whitney_decompose(s);
  expect_clean(w, s);
  for (const auto& q : w.cubes()) {
    if (q.flagged()) continue;
    const double d = q.dist_to_set();
    EXPECT_GE(d, q.cube.diam());
    EXPECT_LE(d, 4 * q.cube.diam());
  }
}

TEST(Whitney, CorpusSetsSatisfyInvariants) {
  {
    Grid g(1, {4096, 1, 1}, {-1.0, 0, 0}, 1.0 / 1024);
    SetSpec spec;
    spec.kind = SetKind::fat_cantor;
    const auto s = spec_set(spec, g);
    expect_clean(whitney_decompose(s), s);
  }
  {
    Grid g(2, {128, 128, 1}, {-0.5, -0.5, 0}, 1.0 / 64);
    SetSpec spec;
    spec.kind = SetKind::fat_carpet;
    spec.splits = {3};
    const auto s = spec_set(spec, g);
    expect_clean(whitney_decompose(s), s);
  }
}

TEST(Whitney, FloorLimitsCubeSizeAndFlags) {
  Grid g(2, {64, 64, 1}, {-0.5, -0.5, 0}, 1.0 / 32);
  SetSpec spec;
  const auto s = spec_set(spec, g);
  WhitneyOptions opts;
  opts.min_radius = 2 * g.h();
  const auto w = whitney_decompose(s, opts);
  std::size_t floors = 0;
  for (const auto& q : w.cubes()) {
    EXPECT_GE(q.cube.radius, opts.min_radius * (1 - 1e-12));
    floors += q.floor;
  }
  EXPECT_GT(floors, 0u);
  const auto c = check_whitney(w, s.cells);
  EXPECT_EQ(c.uncovered_cells, 0u);
  EXPECT_EQ(c.window_violations, 0u);
  EXPECT_EQ(c.overlap_violations, 0u);
}

TEST(Whitney, FloorCubesMeetTheComplement) {
  Grid g(1, {2048, 1, 1}, {-1.0, 0, 0}, 4.0 / 2048);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  const auto s = spec_set(spec, g);
  WhitneyOptions opts;
  opts.min_radius = 8 * g.h();
  const auto w = whitney_decompose(s, opts);
  for (const auto& q : w.cubes()) {
    bool free = false;
    for_each_cell_in(g, q.cube, [&](std::size_t c) { free = free || !s.cells.contains(c); });
    EXPECT_TRUE(free) << "cube at " << q.cube.center[0] << " lies inside S";
  }
}

TEST(Whitney, EmptyComplementGivesEmptyFamily) {
  Grid g(2, {16, 16, 1}, {}, 1.0 / 16);
  const auto s = make_regular_set(CellSet(g, true));
  EXPECT_TRUE(whitney_decompose(s).empty());
}

TEST(Partition, ProfileShape) {
  for (int m : {1, 2, 4}) {
    EXPECT_EQ(bump_profile(-0.1, m), 1.0);
    EXPECT_EQ(bump_profile(1.0, m), 0.0);
    EXPECT_NEAR(bump_profile(0.5, m), 0.5, 1e-14);
    double prev = 1.0;
    for (int i = 1; i < 100; ++i) {
      const double v = bump_profile(i / 100.0, m);
      EXPECT_LE(v, prev);
      prev = v;
    }
    // flat to order m at both ends
    const double e = 1e-3;
    EXPECT_LT(1.0 - bump_profile(e, m), 10 * std::pow(e, m + 1) * std::pow(2.0, 2 * m));
    EXPECT_LT(bump_profile(1 - e, m), 10 * std::pow(e, m + 1) * std::pow(2.0, 2 * m));
  }
}

TEST(Partition, PropertiesAtCellCenters) {
  Grid g(2, {96, 96, 1}, {-0.5, -0.5, 0}, 1.0 / 48);
  SetSpec spec;
  spec.kind = SetKind::lipschitz_subgraph;
  const auto s = spec_set(spec, g);
  const auto w = whitney_decompose(s);
  const auto pu = partition_of_unity(w, s.cells, 4);
  const auto c = check_partition(w, pu, s.cells, 300);
  EXPECT_GT(c.points, 0u);
  EXPECT_LE(c.max_sum_error, 1e-12);
  EXPECT_GE(c.min_phi, 0.0);
  EXPECT_LE(c.max_phi, 1.0);
  EXPECT_EQ(c.support_violations, 0u);
  EXPECT_GT(c.grad_constant, 0.0);
  EXPECT_LT(c.grad_constant, 200.0);
  EXPECT_LT(c.hessian_constant, 1e5);
}

TEST(Partition, SoleCubeGivesOne) {
  const auto s = point_set(16);
  const auto w = whitney_decompose(s);
  // the middle of a cube far from its neighbours' stars
  const std::size_t q = w.find(Cube{{5.0, 0, 0}, 1.0});
  const auto row = phi_at(w, {5.0, 0, 0}, 4);
  ASSERT_EQ(row.size(), 1u);
  EXPECT_EQ(row[0].first, q);
  EXPECT_EQ(row[0].second, 1.0);
}

TEST(Partition, SkippingNormalizationIsDetected) {
  Grid g(1, {512, 1, 1}, {-1.0, 0, 0}, 1.0 / 256);
  SetSpec spec;
  spec.kind = SetKind::half_space;
  const auto s = spec_set(spec, g);
  const auto w = whitney_decompose(s);
  const auto bad = partition_of_unity(w, s.cells, 4, false);
  EXPECT_GT(check_partition(w, bad, s.cells, 0).max_sum_error, 1e-3);
}

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "regext/distance.hpp"
#include "regext/grid.hpp"

namespace regext {

enum class SetKind { box, half_space, fat_cantor, fat_carpet, lipschitz_subgraph, union_of };

std::string to_string(SetKind kind);
SetKind set_kind_from_string(const std::string& name);

/// Description of one of the example sets. Only the fields relevant to `kind` are read.
struct SetSpec {
  SetKind kind = SetKind::box;

  // box: [lo, hi] per axis. fat_cantor / fat_carpet: base cube [lo, hi] (carpet uses axes 0, 1).
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};

  // half_space: {x : x[axis] >= offset}
  int axis = 0;
  double offset = 0.0;

  // fat_cantor: at generation g (1-based) each interval loses an open middle interval of
  // length removal[g-1] * (hi - lo). Empty removal means 4^{-g}. Applied on every axis
  // (a product set) when n > 1.
  int generations = 4;
  std::vector<double> removal;

  // fat_carpet: at generation g every surviving square is split into p x p pieces
  // (p = splits[g-1], odd) and the open middle piece is removed.
  std::vector<int> splits{3, 5};

  // lipschitz_subgraph (n = 2): {lo[0] <= x0 <= hi[0], lo[1] <= x1 <= g(x0)} with g the
  // piecewise-linear interpolant of graph_samples on a uniform partition of [lo[0], hi[0]].
  std::vector<double> graph_samples{0.6, 0.8, 0.5, 0.9, 0.7};

  // union_of
  std::vector<SetSpec> parts;

  /// Lebesgue measure of the truncated construction intersected with the grid box,
  /// from the generator's own bookkeeping (not from the mask).
  double nominal_measure(const Grid& grid) const;
  /// Number of interval/edge endpoints the rasterisation may misplace by up to one cell.
  std::size_t boundary_pieces() const;
};

struct RegularityEstimate {
  double theta = 1.0;
  double delta = 0.0;
  std::size_t centers_sampled = 0;
  std::size_t center_stride = 1;
  std::vector<double> radii;
  std::vector<double> theta_by_delta;  // theta(delta_j) with delta_j = 2 * radii[j]
};

struct RegularityOptions {
  /// Lower bound on delta, in cells.
  double delta_floor_cells = 16.0;
  /// Upper bound on delta in physical units.
  double delta_cap = kInf;
  /// The largest delta whose theta stays within (1 + slack) * min theta is selected.
  double theta_slack = 0.25;
  /// Above this many S cells the centers are subsampled with a deterministic stride.
  std::size_t max_centers = 100000;
};

/// Closed regular set as a union of closed grid cells.
struct RegularSet {
  CellSet cells;
  double theta = 1.0;
  double delta = 0.0;
  RegularityEstimate estimate;
  std::shared_ptr<const NearestIndex> index;

  const Grid& grid() const { return cells.grid(); }
  NearestResult nearest(const Point& x) const { return index->nearest(x); }
};

/// Rasterises a set spec: a cell belongs to S iff its center lies in the closed set.
CellSet rasterize(const SetSpec& spec, const Grid& grid);

/// Geometric ladder h * 2^{j/4} up to r_max, the default radii for regularity scans.
std::vector<double> default_regularity_radii(const Grid& grid);

RegularityEstimate estimate_regularity(const CellSet& s, const std::vector<double>& radii,
                                       const RegularityOptions& opts = {});

/// Builds S from a spec and measures its regularity constants.
RegularSet generate_set(const SetSpec& spec, const Grid& grid, const RegularityOptions& opts = {});

/// Wraps an existing mask; theta/delta are measured unless overrides are given (> 0).
RegularSet make_regular_set(CellSet cells, const RegularityOptions& opts = {}, double theta_override = 0.0,
                            double delta_override = 0.0);

NearestResult nearest_point(const RegularSet& s, const Point& x);

}  // namespace regext

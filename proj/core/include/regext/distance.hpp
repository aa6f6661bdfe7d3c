#pragma once

#include <cstdint>
#include <vector>

#include "regext/grid.hpp"

namespace regext {

/// Sup-norm distance from every cell center to the nearest center of a cell in S,
/// in units of cells (exact chessboard distance). -1 everywhere when S is empty.
std::vector<std::int32_t> chessboard_distance(const CellSet& s);

/// Same field scaled to physical units.
std::vector<double> distance_field(const CellSet& s);

struct NearestResult {
  std::size_t cell = 0;  // flat index of the nearest S cell
  Point point{};         // its center a_x
  double distance = 0.0; // |x - a_x|_inf
};

/// Exact nearest S-cell-center queries in the uniform metric for arbitrary points.
/// Ties go to the Euclidean-closest cell, then the lexicographically smallest multi-index.
class NearestIndex {
 public:
  explicit NearestIndex(const CellSet& s);

  const CellSet& set() const { return set_; }
  const std::vector<std::int32_t>& field() const { return field_; }
  NearestResult nearest(const Point& x) const;
  double distance(const Point& x) const { return nearest(x).distance; }

 private:
  CellSet set_;
  std::vector<std::int32_t> field_;
};

}  // namespace regext

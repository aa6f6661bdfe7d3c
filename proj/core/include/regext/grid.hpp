#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace regext {

inline constexpr int kMaxDim = 3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown for precondition violations and malformed inputs anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::array<double, kMaxDim>;
using Index = std::array<int, kMaxDim>;

/// Closed cube in the uniform norm: {y : |y - center|_inf <= radius}.
struct Cube {
  Point center{};
  double radius = 0.0;

  double diam() const { return 2.0 * radius; }
  double volume(int n) const;
  Cube scale(double lambda) const { return {center, lambda * radius}; }
  /// The enlarged cube (9/8)Q on which partition-of-unity bumps live.
  Cube star() const { return scale(9.0 / 8.0); }
  bool contains(const Point& x, int n, double slack = 0.0) const;
  bool intersects(const Cube& other, int n) const;
};

double sup_dist(const Point& a, const Point& b, int n);

/// Uniform Cartesian grid on a box in R^n, n <= 3. Cells are indexed
/// row-major with the last axis fastest.
class Grid {
 public:
  Grid() = default;
  Grid(int n, Index dims, Point origin, double h);

  int n() const { return n_; }
  const Index& dims() const { return dims_; }
  const Point& origin() const { return origin_; }
  double h() const { return h_; }

  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  /// Box extent along axis i.
  double extent(int i) const { return dims_[i] * h_; }
  /// Half the sup-norm diameter of the box; the largest radius any supremum over r ranges to.
  double r_max() const;

  std::size_t flat(const Index& idx) const;
  Index multi(std::size_t flat) const;
  Point center(const Index& idx) const;
  Point center(std::size_t flat) const { return center(multi(flat)); }
  bool in_bounds(const Index& idx) const;
  /// Index of the cell whose closed footprint contains x, clamped into the box.
  Index locate(const Point& x) const;

  /// Inclusive per-axis index range of cells whose centers lie in the closed cube,
  /// clipped to the box. Empty along some axis when lo > hi.
  void cube_range(const Cube& q, Index& lo, Index& hi) const;

  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int n_ = 1;
  Index dims_{1, 1, 1};
  Point origin_{0.0, 0.0, 0.0};
  double h_ = 1.0;
  std::size_t size_ = 1;
  double cell_volume_ = 1.0;
};

/// Calls fn(flat_index) for every cell whose center lies in the cube.
template <class Fn>
void for_each_cell_in(const Grid& g, const Cube& q, Fn&& fn) {
  Index lo{}, hi{};
  g.cube_range(q, lo, hi);
  for (int i = 0; i < g.n(); ++i)
    if (lo[i] > hi[i]) return;
  const auto& d = g.dims();
  if (g.n() == 1) {
    for (int a = lo[0]; a <= hi[0]; ++a) fn(static_cast<std::size_t>(a));
  } else if (g.n() == 2) {
    for (int a = lo[0]; a <= hi[0]; ++a) {
      const std::size_t row = static_cast<std::size_t>(a) * d[1];
      for (int b = lo[1]; b <= hi[1]; ++b) fn(row + b);
    }
  } else {
    for (int a = lo[0]; a <= hi[0]; ++a)
      for (int b = lo[1]; b <= hi[1]; ++b) {
        const std::size_t row = (static_cast<std::size_t>(a) * d[1] + b) * d[2];
        for (int c = lo[2]; c <= hi[2]; ++c) fn(row + c);
      }
  }
}

/// Per-cell membership mask on a grid.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(Grid grid, bool value = false);
  CellSet(Grid grid, std::vector<std::uint8_t> bits);

  const Grid& grid() const { return grid_; }
  bool contains(std::size_t flat) const { return bits_[flat] != 0; }
  void set(std::size_t flat, bool v = true) { bits_[flat] = v ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<std::size_t> indices() const;

  CellSet operator&(const CellSet& o) const;
  CellSet operator|(const CellSet& o) const;
  CellSet operator-(const CellSet& o) const;
  CellSet complement() const;
  bool subset_of(const CellSet& o) const;
  bool operator==(const CellSet& o) const { return grid_ == o.grid_ && bits_ == o.bits_; }

 private:
  void require_same_grid(const CellSet& o) const;

  Grid grid_;
  std::vector<std::uint8_t> bits_;
};

/// One finite real per cell.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Grid grid, double value = 0.0);
  GridFunction(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  /// Throws if any value is NaN or infinite.
  void require_finite() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

CellSet cube_cells(const Grid& grid, const Cube& cube);
double measure(const CellSet& a);
/// L_u norm of f over A with cell-center Riemann sums; u = kInf gives the max.
/// Empty A gives 0.
double lu_norm(const GridFunction& f, const CellSet& a, double u);
/// Same, over an explicit list of cells.
double lu_norm(const GridFunction& f, const std::vector<std::size_t>& cells, double u);

}  // namespace regext

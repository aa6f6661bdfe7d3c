#include "regext/grid.hpp"

#include <algorithm>
#include <cmath>

namespace regext {

namespace {
// Absolute slack (in units of h) for center-in-cube tests; keeps exact
// boundary hits inside the closed cube despite rounding.
constexpr double kMembershipSlack = 1e-9;
}  // namespace

double Cube::volume(int n) const { return std::pow(2.0 * radius, n); }

bool Cube::contains(const Point& x, int n, double slack) const {
  for (int i = 0; i < n; ++i)
    if (std::abs(x[i] - center[i]) > radius + slack) return false;
  return true;
}

bool Cube::intersects(const Cube& other, int n) const {
  for (int i = 0; i < n; ++i)
    if (std::abs(center[i] - other.center[i]) > radius + other.radius) return false;
  return true;
}

double sup_dist(const Point& a, const Point& b, int n) {
  double d = 0.0;
  for (int i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Grid::Grid(int n, Index dims, Point origin, double h) : n_(n), dims_(dims), origin_(origin), h_(h) {
  if (n < 1 || n > kMaxDim) throw Error("grid dimension must be 1, 2 or 3");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("grid spacing h must be positive");
  size_ = 1;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i >= n) {
      dims_[i] = 1;
      origin_[i] = 0.0;
      continue;
    }
    if (dims_[i] < 1) throw Error("grid dims must be >= 1");
    size_ *= static_cast<std::size_t>(dims_[i]);
  }
  cell_volume_ = std::pow(h, n);
}

double Grid::r_max() const {
  double e = 0.0;
  for (int i = 0; i < n_; ++i) e = std::max(e, extent(i));
  return 0.5 * e;
}

std::size_t Grid::flat(const Index& idx) const {
  std::size_t f = 0;
  for (int i = 0; i < n_; ++i) f = f * dims_[i] + idx[i];
  return f;
}

Index Grid::multi(std::size_t flat) const {
  Index idx{0, 0, 0};
  for (int i = n_ - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % dims_[i]);
    flat /= dims_[i];
  }
  return idx;
}

Point Grid::center(const Index& idx) const {
  Point p{0.0, 0.0, 0.0};
  for (int i = 0; i < n_; ++i) p[i] = origin_[i] + (idx[i] + 0.5) * h_;
  return p;
}

bool Grid::in_bounds(const Index& idx) const {
  for (int i = 0; i < n_; ++i)
    if (idx[i] < 0 || idx[i] >= dims_[i]) return false;
  return true;
}

Index Grid::locate(const Point& x) const {
  Index idx{0, 0, 0};
  for (int i = 0; i < n_; ++i) {
    const double s = std::floor((x[i] - origin_[i]) / h_);
    idx[i] = static_cast<int>(std::clamp(s, 0.0, static_cast<double>(dims_[i] - 1)));
  }
  return idx;
}

void Grid::cube_range(const Cube& q, Index& lo, Index& hi) const {
  const double slack = kMembershipSlack * h_;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i >= n_) {
      lo[i] = 0;
      hi[i] = 0;
      continue;
    }
    // center_j = origin + (j + 1/2) h lies in [c - r, c + r]
    const double a = (q.center[i] - q.radius - slack - origin_[i]) / h_ - 0.5;
    const double b = (q.center[i] + q.radius + slack - origin_[i]) / h_ - 0.5;
    const double lo_d = std::ceil(a);
    const double hi_d = std::floor(b);
    if (hi_d < 0.0 || lo_d > dims_[i] - 1.0 || lo_d > hi_d) {
      lo[i] = 1;
      hi[i] = 0;
      continue;
    }
    lo[i] = static_cast<int>(std::max(lo_d, 0.0));
    hi[i] = static_cast<int>(std::min(hi_d, dims_[i] - 1.0));
  }
}

bool Grid::operator==(const Grid& o) const {
  if (n_ != o.n_ || h_ != o.h_) return false;
  for (int i = 0; i < n_; ++i)
    if (dims_[i] != o.dims_[i] || origin_[i] != o.origin_[i]) return false;
  return true;
}

CellSet::CellSet(Grid grid, bool value) : grid_(std::move(grid)), bits_(grid_.size(), value ? 1 : 0) {}

CellSet::CellSet(Grid grid, std::vector<std::uint8_t> bits) : grid_(std::move(grid)), bits_(std::move(bits)) {
  if (bits_.size() != grid_.size()) throw Error("cell mask size does not match grid");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t CellSet::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> CellSet::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

void CellSet::require_same_grid(const CellSet& o) const {
  if (grid_ != o.grid_) throw Error("cell sets live on different grids");
}

CellSet CellSet::operator&(const CellSet& o) const {
  require_same_grid(o);
  CellSet r(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] & o.bits_[i];
  return r;
}

CellSet CellSet::operator|(const CellSet& o) const {
  require_same_grid(o);
  CellSet r(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] | o.bits_[i];
  return r;
}

CellSet CellSet::operator-(const CellSet& o) const {
  require_same_grid(o);
  CellSet r(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] & (1 - o.bits_[i]);
  return r;
}

CellSet CellSet::complement() const {
  CellSet r(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = 1 - bits_[i];
  return r;
}

bool CellSet::subset_of(const CellSet& o) const {
  require_same_grid(o);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] && !o.bits_[i]) return false;
  return true;
}

GridFunction::GridFunction(Grid grid, double value) : grid_(std::move(grid)), values_(grid_.size(), value) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw Error("grid function size does not match grid");
}

void GridFunction::require_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw Error("grid function has a non-finite value");
}

CellSet cube_cells(const Grid& grid, const Cube& cube) {
  CellSet s(grid);
  for_each_cell_in(grid, cube, [&](std::size_t i) { s.set(i); });
  return s;
}

double measure(const CellSet& a) { return static_cast<double>(a.count()) * a.grid().cell_volume(); }

namespace {
template <class Cells>
double lu_norm_impl(const GridFunction& f, const Cells& visit, double u) {
  const double w = f.grid().cell_volume();
  if (std::isinf(u)) {
    double m = 0.0;
    visit([&](std::size_t i) { m = std::max(m, std::abs(f[i])); });
    return m;
  }
  if (u < 1.0) throw Error("lu_norm requires u >= 1");
  double s = 0.0;
  if (u == 1.0) {
    visit([&](std::size_t i) { s += std::abs(f[i]); });
    return s * w;
  }
  if (u == 2.0) {
    visit([&](std::size_t i) { s += f[i] * f[i]; });
    return std::sqrt(s * w);
  }
  visit([&](std::size_t i) { s += std::pow(std::abs(f[i]), u); });
  return std::pow(s * w, 1.0 / u);
}
}  // namespace

double lu_norm(const GridFunction& f, const CellSet& a, double u) {
  if (f.grid() != a.grid()) throw Error("lu_norm: function and set live on different grids");
  return lu_norm_impl(
      f,
      [&](auto&& fn) {
        for (std::size_t i = 0; i < a.bits().size(); ++i)
          if (a.contains(i)) fn(i);
      },
      u);
}

double lu_norm(const GridFunction& f, const std::vector<std::size_t>& cells, double u) {
  return lu_norm_impl(
      f,
      [&](auto&& fn) {
        for (std::size_t i : cells) fn(i);
      },
      u);
}

}  // namespace regext

#include "regext/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace regext {

std::vector<std::int32_t> chessboard_distance(const CellSet& s) {
  const Grid& g = s.grid();
  const int n = g.n();
  const auto& d = g.dims();
  const std::int32_t big = std::numeric_limits<std::int32_t>::max() / 2;
  std::vector<std::int32_t> dist(g.size(), big);
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (s.contains(i)) {
      dist[i] = 0;
      any = true;
    }
  if (!any) return std::vector<std::int32_t>(g.size(), -1);

  // Offsets of the 3^n - 1 neighbours split into raster-causal and anti-causal halves.
  std::vector<Index> causal;
  for (int a = -1; a <= 1; ++a)
    for (int b = (n >= 2 ? -1 : 0); b <= (n >= 2 ? 1 : 0); ++b)
      for (int c = (n >= 3 ? -1 : 0); c <= (n >= 3 ? 1 : 0); ++c) {
        const Index off{a, b, c};
        // causal iff the offset precedes zero lexicographically
        int sign = 0;
        for (int i = 0; i < 3 && sign == 0; ++i) sign = (off[i] > 0) - (off[i] < 0);
        if (sign < 0) causal.push_back(off);
      }

  auto relax = [&](std::size_t flat, int dir) {
    const Index idx = g.multi(flat);
    std::int32_t best = dist[flat];
    for (const Index& o : causal) {
      Index nb{idx[0] + dir * o[0], idx[1] + dir * o[1], idx[2] + dir * o[2]};
      bool ok = true;
      for (int i = 0; i < n; ++i)
        if (nb[i] < 0 || nb[i] >= d[i]) ok = false;
      if (!ok) continue;
      best = std::min(best, dist[g.flat(nb)] + 1);
    }
    dist[flat] = best;
  };
  for (std::size_t f = 0; f < g.size(); ++f) relax(f, 1);
  for (std::size_t f = g.size(); f-- > 0;) relax(f, -1);
  return dist;
}

std::vector<double> distance_field(const CellSet& s) {
  const auto cells = chessboard_distance(s);
  std::vector<double> out(cells.size());
  const double h = s.grid().h();
  for (std::size_t i = 0; i < cells.size(); ++i) out[i] = cells[i] < 0 ? kInf : cells[i] * h;
  return out;
}

NearestIndex::NearestIndex(const CellSet& s) : set_(s), field_(chessboard_distance(s)) {
  if (s.grid().size() > 0 && field_[0] < 0) throw Error("nearest-point index over an empty set");
}

namespace {

bool lex_less(const Index& a, const Index& b, int n) {
  for (int i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Visits every in-bounds index at chessboard distance exactly r from c.
template <class Fn>
void for_each_on_ring(const Grid& g, const Index& c, int r, Fn&& fn) {
  const int n = g.n();
  const auto& d = g.dims();
  if (r == 0) {
    fn(c);
    return;
  }
  Index lo{}, hi{};
  for (int i = 0; i < 3; ++i) {
    lo[i] = i < n ? std::max(0, c[i] - r) : 0;
    hi[i] = i < n ? std::min(d[i] - 1, c[i] + r) : 0;
  }
  for (int a = lo[0]; a <= hi[0]; ++a) {
    const bool ea = std::abs(a - c[0]) == r;
    for (int b = lo[1]; b <= hi[1]; ++b) {
      const bool eb = n >= 2 && std::abs(b - c[1]) == r;
      if (n <= 2) {
        if (ea || eb) fn(Index{a, b, 0});
        continue;
      }
      if (ea || eb) {
        for (int z = lo[2]; z <= hi[2]; ++z) fn(Index{a, b, z});
      } else {
        if (c[2] - r >= 0) fn(Index{a, b, c[2] - r});
        if (c[2] + r < d[2]) fn(Index{a, b, c[2] + r});
      }
    }
  }
}

}  // namespace

NearestResult NearestIndex::nearest(const Point& x) const {
  const Grid& g = set_.grid();
  const int n = g.n();
  const double h = g.h();
  const Index c = g.locate(x);
  const double e = sup_dist(x, g.center(c), n);
  const int base = field_[g.flat(c)];
  const int top = base + static_cast<int>(std::ceil(2.0 * e / h + 1e-9));
  const double tol = 1e-12 * h;

  NearestResult best;
  best.distance = kInf;
  Index best_idx{};
  double best_e2 = kInf;
  bool found = false;
  for (int r = base; r <= top; ++r) {
    for_each_on_ring(g, c, r, [&](const Index& idx) {
      const std::size_t f = g.flat(idx);
      if (!set_.contains(f)) return;
      const Point p = g.center(idx);
      const double dd = sup_dist(p, x, n);
      double e2 = 0.0;
      for (int i = 0; i < n; ++i) e2 += (p[i] - x[i]) * (p[i] - x[i]);
      bool better = !found || dd < best.distance - tol;
      if (!better && dd <= best.distance + tol) {
        // sup-metric ties: prefer the Euclidean foot point so anchors vary continuously
        better = e2 < best_e2 - tol * tol || (e2 <= best_e2 + tol * tol && lex_less(idx, best_idx, n));
      }
      if (better) {
        found = true;
        best = {f, p, dd};
        best_idx = idx;
        best_e2 = e2;
      }
    });
  }
  return best;
}

}  // namespace regext

#include "regext/approx.hpp"

#include <algorithm>
#include <cmath>

#include "regext/lp.hpp"
#include "regext/parallel.hpp"

namespace regext {

namespace {

constexpr double kPivotTol = 1e-10;

struct Frame {
  Point center{};
  double scale = 1.0;
};

template <class Cells>
Frame bounding_frame(const Grid& g, const Cells& cells) {
  const int n = g.n();
  Point lo, hi;
  lo.fill(kInf);
  hi.fill(-kInf);
  for (auto c : cells) {
    const Point x = g.center(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  }
  Frame fr;
  double half = 0.0;
  for (int i = 0; i < n; ++i) {
    fr.center[i] = 0.5 * (lo[i] + hi[i]);
    half = std::max(half, 0.5 * (hi[i] - lo[i]));
  }
  fr.scale = half + 0.5 * g.h();
  return fr;
}

// Least-squares fit of values at points; coords are n-strided. One refinement sweep
// when `refine` is set. Returns the rank.
int fit(const std::vector<Index>& betas, int n, int k, const Frame& fr, const double* coords,
        const double* values, std::size_t m, bool refine, std::vector<double>& basis, std::vector<double>& coeffs) {
  const int dim = static_cast<int>(betas.size());
  basis.resize(m * dim);
  std::vector<double> gram(dim * dim, 0.0), rhs(dim, 0.0);
  for (std::size_t p = 0; p < m; ++p) {
    Point x{};
    for (int i = 0; i < n; ++i) x[i] = coords[p * n + i];
    double* row = &basis[p * dim];
    basis_values(betas, n, k, fr.center, fr.scale, x, row);
    for (int a = 0; a < dim; ++a) {
      rhs[a] += row[a] * values[p];
      for (int b = 0; b <= a; ++b) gram[a * dim + b] += row[a] * row[b];
    }
  }
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < a; ++b) gram[b * dim + a] = gram[a * dim + b];
  const int rank = pivoted_cholesky_solve(gram, rhs, dim, kPivotTol, coeffs);
  if (refine && rank > 0) {
    std::vector<double> r(dim, 0.0), dc;
    for (std::size_t p = 0; p < m; ++p) {
      const double* row = &basis[p * dim];
      double v = values[p];
      for (int a = 0; a < dim; ++a) v -= coeffs[a] * row[a];
      for (int a = 0; a < dim; ++a) r[a] += row[a] * v;
    }
    pivoted_cholesky_solve(gram, r, dim, kPivotTol, dc);
    for (int a = 0; a < dim; ++a) coeffs[a] += dc[a];
  }
  return rank;
}

template <class Cells>
ProjectorResult project_impl(const GridFunction& f, const Cells& cells, int k) {
  const Grid& g = f.grid();
  const int n = g.n();
  ProjectorResult out;
  if (cells.empty()) {
    out.empty = true;
    out.poly = Polynomial(n, k);
    return out;
  }
  const Frame fr = bounding_frame(g, cells);
  out.poly = Polynomial(n, k, fr.center, fr.scale);
  if (k <= 0) return out;
  const auto betas = multi_indices(n, k);
  std::vector<double> coords(cells.size() * n), values(cells.size()), basis;
  std::size_t p = 0;
  for (auto c : cells) {
    const Point x = g.center(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) coords[p * n + i] = x[i];
    values[p++] = f[static_cast<std::size_t>(c)];
  }
  out.rank = fit(betas, n, k, fr, coords.data(), values.data(), cells.size(), true, basis, out.poly.coeffs);
  out.deficient = out.rank < static_cast<int>(betas.size());
  return out;
}

double residual_norm(const GridFunction& f, std::span<const std::uint32_t> cells, const Polynomial& p, double u) {
  const Grid& g = f.grid();
  GridFunction r(g, 0.0);
  std::vector<std::size_t> idx(cells.begin(), cells.end());
  for (std::size_t c : idx) r[c] = f[c] - p(g.center(c));
  return lu_norm(r, idx, u);
}

ApproxResult exact_lp(const GridFunction& f, std::span<const std::uint32_t> cells, int k, double u) {
  const Grid& g = f.grid();
  const int n = g.n();
  const auto betas = multi_indices(n, k);
  const int dim = static_cast<int>(betas.size());
  const int m = static_cast<int>(cells.size());
  const Frame fr = bounding_frame(g, cells);
  std::vector<double> basis(static_cast<std::size_t>(m) * dim);
  for (int i = 0; i < m; ++i) basis_values(betas, n, k, fr.center, fr.scale, g.center(cells[i]), &basis[i * dim]);

  LinearProgram lp;
  const double w = g.cell_volume();
  if (std::isinf(u)) {
    lp.rows = dim + 1;
    lp.cols = 2 * m;
    lp.a.assign(static_cast<std::size_t>(lp.rows) * lp.cols, 0.0);
    lp.b.assign(lp.rows, 0.0);
    lp.b[dim] = 1.0;
    lp.c.resize(lp.cols);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < dim; ++j) {
        lp.a[static_cast<std::size_t>(j) * lp.cols + 2 * i] = basis[i * dim + j];
        lp.a[static_cast<std::size_t>(j) * lp.cols + 2 * i + 1] = -basis[i * dim + j];
      }
      lp.a[static_cast<std::size_t>(dim) * lp.cols + 2 * i] = 1.0;
      lp.a[static_cast<std::size_t>(dim) * lp.cols + 2 * i + 1] = 1.0;
      lp.c[2 * i] = f[cells[i]];
      lp.c[2 * i + 1] = -f[cells[i]];
    }
  } else {
    lp.rows = dim;
    lp.cols = m;
    lp.a.assign(static_cast<std::size_t>(dim) * m, 0.0);
    lp.b.assign(dim, 0.0);
    lp.c.resize(m);
    lp.upper.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < dim; ++j) {
        lp.a[static_cast<std::size_t>(j) * m + i] = basis[i * dim + j];
        lp.b[j] += w * basis[i * dim + j];
      }
      lp.c[i] = f[cells[i]];
      lp.upper[i] = 2.0 * w;
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpSolution::Status::optimal) throw Error("best-approximation LP did not reach optimality");
  ApproxResult out;
  out.poly = Polynomial(n, k, fr.center, fr.scale);
  for (int j = 0; j < dim; ++j) out.poly.coeffs[j] = sol.duals[j];
  out.value = residual_norm(f, cells, out.poly, u);
  return out;
}

}  // namespace

ProjectorResult projector(const GridFunction& f, std::span<const std::uint32_t> cells, int k) {
  return project_impl(f, cells, k);
}

ProjectorResult projector(const GridFunction& f, const CellSet& a, int k) {
  if (f.grid() != a.grid()) throw Error("projector: function and set live on different grids");
  return project_impl(f, a.indices(), k);
}

ApproxResult local_best_approx(const GridFunction& f, std::span<const std::uint32_t> cells, int k, double u,
                               ApproxMode mode) {
  if (u < 1.0) throw Error("local_best_approx requires u >= 1");
  ApproxResult out;
  if (cells.empty()) {
    out.poly = Polynomial(f.grid().n(), k);
    return out;
  }
  if (k <= 0) {
    out.poly = Polynomial(f.grid().n(), 0);
    out.value = residual_norm(f, cells, out.poly, u);
    return out;
  }
  if (mode == ApproxMode::exact && (u == 1.0 || std::isinf(u))) return exact_lp(f, cells, k, u);
  const ProjectorResult p = projector(f, cells, k);
  out.poly = p.poly;
  out.deficient = p.deficient;
  out.value = residual_norm(f, cells, p.poly, u);
  return out;
}

ApproxResult local_best_approx(const GridFunction& f, const CellSet& a, int k, double u, ApproxMode mode) {
  std::vector<std::uint32_t> cells;
  for (std::size_t c : a.indices()) cells.push_back(static_cast<std::uint32_t>(c));
  return local_best_approx(f, cells, k, u, mode);
}

double normalized_local_approx(const GridFunction& f, const Cube& q, const CellSet& s, int k, double u,
                               ApproxMode mode) {
  std::vector<std::uint32_t> cells;
  for_each_cell_in(f.grid(), q, [&](std::size_t c) {
    if (s.contains(c)) cells.push_back(static_cast<std::uint32_t>(c));
  });
  const double e = local_best_approx(f, cells, k, u, mode).value;
  if (std::isinf(u)) return e;
  return e * std::pow(q.volume(f.grid().n()), -1.0 / u);
}

double LocalErrors::norm(double u, double extra_p) const {
  if (std::isinf(u)) return linf;
  if (u == 1.0) return l1;
  if (u == 2.0) return std::sqrt(l2sq);
  if (u == extra_p) return std::pow(lp, 1.0 / u);
  throw Error("LocalErrors: exponent was not accumulated");
}

LocalErrors cube_fit_errors(const GridFunction& f, const CellSet* mask, const Cube& q, int k, double extra_p,
                            FitWorkspace& ws) {
  const Grid& g = f.grid();
  const int n = g.n();
  ws.coords.clear();
  ws.values.clear();
  Point lo, hi;
  lo.fill(kInf);
  hi.fill(-kInf);
  for_each_cell_in(g, q, [&](std::size_t c) {
    if (mask && !mask->contains(c)) return;
    const Point x = g.center(c);
    for (int i = 0; i < n; ++i) {
      ws.coords.push_back(x[i]);
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
    ws.values.push_back(f[c]);
  });
  LocalErrors e;
  const std::size_t m = ws.values.size();
  e.cells = m;
  if (m == 0) return e;
  const double w = g.cell_volume();
  if (k > 0) {
    Frame fr;
    double half = 0.0;
    for (int i = 0; i < n; ++i) {
      fr.center[i] = 0.5 * (lo[i] + hi[i]);
      half = std::max(half, 0.5 * (hi[i] - lo[i]));
    }
    fr.scale = half + 0.5 * g.h();
    thread_local std::vector<Index> betas;
    thread_local int cached_n = -1, cached_k = -1;
    if (cached_n != n || cached_k != k) {
      betas = multi_indices(n, k);
      cached_n = n;
      cached_k = k;
    }
    const int dim = static_cast<int>(betas.size());
    const int rank = fit(betas, n, k, fr, ws.coords.data(), ws.values.data(), m, false, ws.basis, ws.coeffs);
    e.deficient = rank < dim;
    for (std::size_t p = 0; p < m; ++p) {
      const double* row = &ws.basis[p * dim];
      for (int a = 0; a < dim; ++a) ws.values[p] -= ws.coeffs[a] * row[a];
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    const double r = std::abs(ws.values[p]);
    e.l1 += r;
    e.l2sq += r * r;
    e.linf = std::max(e.linf, r);
    if (extra_p > 0.0 && std::isfinite(extra_p)) e.lp += std::pow(r, extra_p);
  }
  e.l1 *= w;
  e.l2sq *= w;
  e.lp *= w;
  return e;
}

ProjectorMap assign_pq(const GridFunction& f, const WhitneyDecomposition& w, const QuasiCubeFamily& h, int k) {
  ProjectorMap pm;
  const int n = f.grid().n();
  pm.poly.assign(w.size(), Polynomial(n, k));
  pm.zero.assign(w.size(), true);
  pm.deficient_cube.assign(w.size(), false);
  parallel_for(0, w.size(), [&](std::size_t q) {
    if (!h.small[q] || h.cells[q].empty()) return;
    ProjectorResult r = projector(f, h.cells[q], k);
    pm.poly[q] = std::move(r.poly);
    pm.zero[q] = false;
    pm.deficient_cube[q] = r.deficient;
  });
  for (bool d : pm.deficient_cube) pm.deficient += d ? 1 : 0;
  return pm;
}

}  // namespace regext

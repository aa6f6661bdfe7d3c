#include "regext/extension.hpp"

#include <cmath>

#include "regext/parallel.hpp"

namespace regext {

double default_floor_cells(int k) { return std::max(1.0, static_cast<double>(k - 1)); }

ExtensionOperator::ExtensionOperator(const RegularSet& s, int k, const ExtensionOptions& opts) : s_(s), k_(k) {
  if (k < 0) throw Error("extension order k must be >= 0");
  const double floor_cells = opts.floor_cells > 0.0 ? opts.floor_cells : default_floor_cells(k);
  double eps = opts.eps0;
  bool done = false;
  for (int i = 0; i <= opts.quasi.max_halvings && !done; ++i, eps *= 0.5) {
    WhitneyOptions wo = opts.whitney;
    wo.min_radius = std::max(wo.min_radius, floor_cells * s.grid().h() / eps);
    WhitneyDecomposition w(s, wo);
    QuasiCubeOptions qo = opts.quasi;
    qo.max_halvings = 0;
    try {
      QuasiCubeFamily h = build_quasicubes(s, w, eps, qo);
      if (h.valid() && h.gamma1 <= opts.quasi.gamma1_cap) {
        w_ = std::move(w);
        h_ = std::move(h);
        done = true;
      } else {
        diagnostics_.push_back("epsilon=" + std::to_string(eps) + ": gamma1=" + std::to_string(h.gamma1) +
                               " empty=" + std::to_string(h.empty_small));
      }
    } catch (const Error& e) {
      diagnostics_.push_back("epsilon=" + std::to_string(eps) + ": " + e.what());
    }
  }
  if (!done) {
    std::string msg = "no admissible epsilon for the extension operator";
    for (const auto& d : diagnostics_) msg += "; " + d;
    throw Error(msg);
  }
  const int m = opts.smoothness > 0 ? opts.smoothness : std::max(k, 1);
  pu_ = partition_of_unity(w_, s_.cells, m);
}

Extension extend(const GridFunction& f, const ExtensionOperator& op) {
  const Grid& g = op.set().grid();
  if (f.grid() != g) throw Error("extend: function lives on a different grid");
  for (std::size_t c : op.set().cells.indices())
    if (!std::isfinite(f[c])) throw Error("extend: f is not finite on S");
  Extension out{GridFunction(g, 0.0), assign_pq(f, op.whitney(), op.quasicubes(), op.k())};
  const auto& pu = op.partition();
  const auto& pm = out.projectors;
  const int n = g.n();
  const auto betas = multi_indices(n, op.k());
  const CellSet& s = op.set().cells;
  parallel_for(0, g.size(), [&](std::size_t c) {
    if (s.contains(c)) {
      out.values[c] = f[c];
      return;
    }
    const Point x = g.center(c);
    double v = 0.0;
    double basis[64];
    for (std::size_t t = pu.row_begin(c); t < pu.row_end(c); ++t) {
      const std::size_t q = pu.cube[t];
      if (pm.zero[q]) continue;
      const Polynomial& p = pm.poly[q];
      basis_values(betas, n, op.k(), p.center, p.scale, x, basis);
      double pv = 0.0;
      for (std::size_t j = 0; j < betas.size(); ++j) pv += p.coeffs[j] * basis[j];
      v += pu.phi[t] * pv;
    }
    out.values[c] = v;
  });
  return out;
}

NormCheck extend_norm_check(const GridFunction& f, const GridFunction& ef, const RegularSet& s, const Cube& k,
                            double u) {
  const Grid& g = s.grid();
  NormCheck r;
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    if (k.center[i] - k.radius < g.origin()[i] || k.center[i] + k.radius > g.origin()[i] + g.extent(i)) {
      r.skipped = true;
      r.reason = "cube leaves the computational box";
      return r;
    }
  if (!s.cells.contains(g.flat(g.locate(k.center)))) {
    r.skipped = true;
    r.reason = "cube not centered in S";
    return r;
  }
  std::vector<std::size_t> in_k, in_25;
  for_each_cell_in(g, k, [&](std::size_t c) { in_k.push_back(c); });
  for_each_cell_in(g, k.scale(25.0), [&](std::size_t c) {
    if (s.cells.contains(c)) in_25.push_back(c);
  });
  r.lhs = lu_norm(ef, in_k, u);
  r.rhs = lu_norm(f, in_25, u);
  return r;
}

}  // namespace regext

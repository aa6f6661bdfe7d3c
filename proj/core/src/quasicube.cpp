#include "regext/quasicube.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regext/parallel.hpp"

namespace regext {

namespace {
constexpr double kRelTol = 1e-12;
}

double default_epsilon(double theta, int n, double overlap) {
  if (theta < 1.0 || overlap < 1.0) throw Error("default_epsilon: theta and N must be >= 1");
  return std::min(1.0, std::pow(2.0 * overlap * std::pow(12.0, n) * theta, -1.0 / n));
}

QuasiCubeFamily build_quasicubes(const RegularSet& s, const WhitneyDecomposition& w, double epsilon,
                                 const QuasiCubeOptions& opts) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in (0, 1]");
  const Grid& g = s.grid();
  const int n = g.n();
  QuasiCubeFamily fam;
  fam.epsilon = epsilon;
  fam.delta = s.delta;
  fam.cubes_total = w.size();
  fam.cells.assign(w.size(), {});
  fam.small.assign(w.size(), false);

  double min_r = kInf;
  for (std::size_t q = 0; q < w.size(); ++q) {
    fam.small[q] = w[q].cube.diam() <= s.delta * (1 + kRelTol);
    if (fam.small[q]) {
      ++fam.cubes_small;
      min_r = std::min(min_r, w[q].cube.radius);
    }
  }
  fam.min_small_radius = std::isfinite(min_r) ? min_r : 0.0;
  if (fam.cubes_small > 0 && epsilon * min_r < g.h() * (1 - kRelTol))
    throw Error("refine grid or raise epsilon: epsilon * r_min = " + std::to_string(epsilon * min_r) +
                " < h = " + std::to_string(g.h()));

  // Cubes bucketed by the cell of their anchor a_K.
  std::vector<std::size_t> off(g.size() + 1, 0);
  for (const auto& c : w.cubes()) ++off[c.anchor + 1];
  for (std::size_t i = 0; i < g.size(); ++i) off[i + 1] += off[i];
  std::vector<std::uint32_t> by_anchor(off.back());
  {
    std::vector<std::size_t> fill(off.begin(), off.end() - 1);
    for (std::size_t q = 0; q < w.size(); ++q) by_anchor[fill[w[q].anchor]++] = static_cast<std::uint32_t>(q);
  }

  auto eps_cube = [&](std::size_t q) { return Cube{g.center(w[q].anchor), epsilon * w[q].cube.radius}; };

  parallel_for(0, w.size(), [&](std::size_t q) {
    if (!fam.small[q]) return;
    const Cube qe = eps_cube(q);
    std::vector<std::uint32_t> h;
    for_each_cell_in(g, qe, [&](std::size_t c) {
      if (s.cells.contains(c)) h.push_back(static_cast<std::uint32_t>(c));
    });
    if (h.empty()) return;
    std::vector<std::uint8_t> keep(h.size(), 1);
    const double rq = w[q].cube.radius;
    const double kmax = epsilon * rq * (1 + kRelTol);
    const Cube search{qe.center, epsilon * (rq + kmax)};
    for_each_cell_in(g, search, [&](std::size_t a) {
      for (std::size_t t = off[a]; t < off[a + 1]; ++t) {
        const std::size_t k = by_anchor[t];
        if (w[k].cube.radius > kmax) continue;
        const Cube ke = eps_cube(k);
        if (!ke.intersects(qe, n)) continue;
        for (std::size_t i = 0; i < h.size(); ++i)
          if (keep[i] && ke.contains(g.center(h[i]), n, 1e-9 * g.h())) keep[i] = 0;
      }
    });
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < h.size(); ++i)
      if (keep[i]) out.push_back(h[i]);
    fam.cells[q] = std::move(out);
  });

  std::vector<int> cover(g.size(), 0);
  fam.gamma1 = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) {
    const auto& hq = fam.cells[q];
    if (!fam.small[q]) continue;
    if (hq.empty()) {
      ++fam.empty_small;
      fam.gamma1 = kInf;
      continue;
    }
    ++fam.cubes_with_h;
    fam.gamma1 = std::max(fam.gamma1, w[q].cube.volume(n) / (hq.size() * g.cell_volume()));
    const Cube ten = w[q].cube.scale(10.0);
    for (std::uint32_t c : hq) {
      ++cover[c];
      if (!s.cells.contains(c) || !ten.contains(g.center(c), n, 1e-9 * g.h())) ++fam.inclusion_violations;
    }
  }
  fam.gamma2 = cover.empty() ? 0 : *std::max_element(cover.begin(), cover.end());

  if (opts.audit_mechanism && fam.gamma2 > 1) {
    std::vector<std::size_t> coff(g.size() + 1, 0);
    for (std::size_t c = 0; c < g.size(); ++c) coff[c + 1] = coff[c] + cover[c];
    std::vector<std::uint32_t> owners(coff.back());
    std::vector<std::size_t> fill(coff.begin(), coff.end() - 1);
    for (std::size_t q = 0; q < w.size(); ++q)
      for (std::uint32_t c : fam.cells[q]) owners[fill[c]++] = static_cast<std::uint32_t>(q);
    for (std::size_t c = 0; c < g.size(); ++c)
      for (std::size_t i = coff[c]; i < coff[c + 1]; ++i)
        for (std::size_t j = i + 1; j < coff[c + 1]; ++j) {
          const double r1 = w[owners[i]].cube.radius, r2 = w[owners[j]].cube.radius;
          if (!(r1 > epsilon * r2 * (1 + kRelTol)) || !(r2 > epsilon * r1 * (1 + kRelTol)))
            ++fam.mechanism_violations;
        }
  }
  return fam;
}

EpsilonSearch auto_epsilon(const RegularSet& s, const WhitneyDecomposition& w, double eps0,
                           const QuasiCubeOptions& opts) {
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw Error("auto_epsilon: eps0 must lie in (0, 1]");
  EpsilonSearch out;
  auto attempt = [&](double eps) {
    std::ostringstream d;
    d << "epsilon=" << eps << ": ";
    try {
      QuasiCubeFamily fam = build_quasicubes(s, w, eps, opts);
      if (fam.valid() && fam.gamma1 <= opts.gamma1_cap) {
        out.epsilon = eps;
        out.family = std::move(fam);
        return true;
      }
      d << "gamma1=" << fam.gamma1 << " gamma2=" << fam.gamma2 << " empty=" << fam.empty_small
        << " inclusion=" << fam.inclusion_violations << " mechanism=" << fam.mechanism_violations;
    } catch (const Error& e) {
      d << e.what();
    }
    out.diagnostics.push_back(d.str());
    return false;
  };
  double eps = eps0;
  for (int i = 0; i <= opts.max_halvings; ++i, eps *= 0.5)
    if (attempt(eps)) return out;
  if (attempt(default_epsilon(s.theta, s.grid().n()))) return out;
  std::string msg = "auto_epsilon: no candidate passed";
  for (const auto& d : out.diagnostics) msg += "; " + d;
  throw Error(msg);
}

}  // namespace regext

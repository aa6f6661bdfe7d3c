#include "regext/regular_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "regext/parallel.hpp"
#include "regext/prefix_sum.hpp"

namespace regext {

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::box: return "box";
    case SetKind::half_space: return "half_space";
    case SetKind::fat_cantor: return "fat_cantor";
    case SetKind::fat_carpet: return "fat_sierpinski_carpet";
    case SetKind::lipschitz_subgraph: return "lipschitz_subgraph";
    case SetKind::union_of: return "union";
  }
  return "unknown";
}

SetKind set_kind_from_string(const std::string& name) {
  if (name == "box") return SetKind::box;
  if (name == "half_space") return SetKind::half_space;
  if (name == "fat_cantor") return SetKind::fat_cantor;
  if (name == "fat_sierpinski_carpet" || name == "fat_carpet") return SetKind::fat_carpet;
  if (name == "lipschitz_subgraph") return SetKind::lipschitz_subgraph;
  if (name == "union") return SetKind::union_of;
  throw Error("unknown set kind: " + name);
}

namespace {

constexpr double kEdgeSlack = 1e-12;

struct Interval {
  double a, b;
};

struct Square {
  double x0, y0, side;
};

std::vector<double> cantor_removal(const SetSpec& spec) {
  std::vector<double> r = spec.removal;
  if (r.empty())
    for (int g = 1; g <= spec.generations; ++g) r.push_back(std::pow(4.0, -g));
  if (static_cast<int>(r.size()) < spec.generations) throw Error("fat_cantor: fewer removal ratios than generations");
  r.resize(spec.generations);
  double total = 0.0;
  for (int g = 0; g < spec.generations; ++g) {
    if (!(r[g] > 0.0 && r[g] < 1.0)) throw Error("fat_cantor: removal ratios must lie in (0,1)");
    total += std::ldexp(r[g], g);  // 2^{g} intervals lose r[g] each
  }
  if (total >= 1.0) throw Error("fat_cantor: removed proportion must stay below 1");
  return r;
}

// Kept intervals and removed open gaps of the 1-D construction on [lo, hi].
void cantor_intervals(const SetSpec& spec, double lo, double hi, std::vector<Interval>& kept,
                      std::vector<Interval>& gaps) {
  const auto r = cantor_removal(spec);
  const double len0 = hi - lo;
  kept = {{lo, hi}};
  gaps.clear();
  for (double ratio : r) {
    std::vector<Interval> next;
    next.reserve(kept.size() * 2);
    const double cut = ratio * len0;
    for (const auto& iv : kept) {
      if (cut >= iv.b - iv.a) throw Error("fat_cantor: gap wider than the interval it splits");
      const double m = 0.5 * (iv.a + iv.b);
      gaps.push_back({m - 0.5 * cut, m + 0.5 * cut});
      next.push_back({iv.a, m - 0.5 * cut});
      next.push_back({m + 0.5 * cut, iv.b});
    }
    kept = std::move(next);
  }
}

void carpet_squares(const SetSpec& spec, std::vector<Square>& kept, std::vector<Square>& holes) {
  const double side0 = spec.hi[0] - spec.lo[0];
  if (std::abs((spec.hi[1] - spec.lo[1]) - side0) > 1e-12) throw Error("fat_carpet: base must be a square");
  kept = {{spec.lo[0], spec.lo[1], side0}};
  holes.clear();
  double measure_left = 1.0;
  for (int p : spec.splits) {
    if (p < 3 || p % 2 == 0) throw Error("fat_carpet: splits must be odd and >= 3");
    measure_left *= 1.0 - 1.0 / (static_cast<double>(p) * p);
    std::vector<Square> next;
    next.reserve(kept.size() * (p * p - 1));
    for (const auto& sq : kept) {
      const double s = sq.side / p;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
          const Square piece{sq.x0 + i * s, sq.y0 + j * s, s};
          if (i == p / 2 && j == p / 2)
            holes.push_back(piece);
          else
            next.push_back(piece);
        }
    }
    kept = std::move(next);
  }
  if (!(measure_left > 0.0)) throw Error("fat_carpet: degenerate spec");
}

double clip_len(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

double lipschitz_g(const SetSpec& spec, double x) {
  const auto& s = spec.graph_samples;
  if (s.size() < 2) throw Error("lipschitz_subgraph: need at least two graph samples");
  const double t = (x - spec.lo[0]) / (spec.hi[0] - spec.lo[0]) * (s.size() - 1);
  const double ft = std::clamp(std::floor(t), 0.0, static_cast<double>(s.size() - 2));
  const std::size_t k = static_cast<std::size_t>(ft);
  const double w = t - ft;
  return (1.0 - w) * s[k] + w * s[k + 1];
}

void rasterize_into(const SetSpec& spec, const Grid& grid, std::vector<std::uint8_t>& bits) {
  const int n = grid.n();
  const double eps = kEdgeSlack * grid.h();
  switch (spec.kind) {
    case SetKind::box:
      for (std::size_t f = 0; f < grid.size(); ++f) {
        const Point c = grid.center(f);
        bool in = true;
        for (int i = 0; i < n; ++i) in = in && c[i] >= spec.lo[i] - eps && c[i] <= spec.hi[i] + eps;
        if (in) bits[f] = 1;
      }
      break;
    case SetKind::half_space:
      if (spec.axis < 0 || spec.axis >= n) throw Error("half_space: axis out of range");
      for (std::size_t f = 0; f < grid.size(); ++f)
        if (grid.center(f)[spec.axis] >= spec.offset - eps) bits[f] = 1;
      break;
    case SetKind::fat_cantor: {
      std::vector<std::vector<std::uint8_t>> axis_mask(n);
      for (int i = 0; i < n; ++i) {
        std::vector<Interval> kept, gaps;
        cantor_intervals(spec, spec.lo[i], spec.hi[i], kept, gaps);
        auto& m = axis_mask[i];
        m.assign(grid.dims()[i], 0);
        for (int j = 0; j < grid.dims()[i]; ++j) {
          const double c = grid.origin()[i] + (j + 0.5) * grid.h();
          if (c < spec.lo[i] - eps || c > spec.hi[i] + eps) continue;
          bool in = true;
          for (const auto& gp : gaps)
            if (c > gp.a + eps && c < gp.b - eps) {
              in = false;
              break;
            }
          m[j] = in ? 1 : 0;
        }
      }
      for (std::size_t f = 0; f < grid.size(); ++f) {
        const Index idx = grid.multi(f);
        bool in = true;
        for (int i = 0; i < n; ++i) in = in && axis_mask[i][idx[i]];
        if (in) bits[f] = 1;
      }
      break;
    }
    case SetKind::fat_carpet: {
      if (n != 2) throw Error("fat_carpet requires n = 2");
      std::vector<Square> kept, holes;
      carpet_squares(spec, kept, holes);
      for (std::size_t f = 0; f < grid.size(); ++f) {
        const Point c = grid.center(f);
        if (c[0] < spec.lo[0] - eps || c[0] > spec.hi[0] + eps || c[1] < spec.lo[1] - eps ||
            c[1] > spec.hi[1] + eps)
          continue;
        bool in = true;
        for (const auto& sq : holes)
          if (c[0] > sq.x0 + eps && c[0] < sq.x0 + sq.side - eps && c[1] > sq.y0 + eps &&
              c[1] < sq.y0 + sq.side - eps) {
            in = false;
            break;
          }
        if (in) bits[f] = 1;
      }
      break;
    }
    case SetKind::lipschitz_subgraph: {
      if (n != 2) throw Error("lipschitz_subgraph requires n = 2");
      for (std::size_t f = 0; f < grid.size(); ++f) {
        const Point c = grid.center(f);
        if (c[0] < spec.lo[0] - eps || c[0] > spec.hi[0] + eps) continue;
        if (c[1] >= spec.lo[1] - eps && c[1] <= lipschitz_g(spec, c[0]) + eps) bits[f] = 1;
      }
      break;
    }
    case SetKind::union_of:
      for (const auto& part : spec.parts) rasterize_into(part, grid, bits);
      break;
  }
}

}  // namespace

double SetSpec::nominal_measure(const Grid& grid) const {
  const int n = grid.n();
  auto box_lo = [&](int i) { return grid.origin()[i]; };
  auto box_hi = [&](int i) { return grid.origin()[i] + grid.extent(i); };
  switch (kind) {
    case SetKind::box: {
      double m = 1.0;
      for (int i = 0; i < n; ++i) m *= clip_len(lo[i], hi[i], box_lo(i), box_hi(i));
      return m;
    }
    case SetKind::half_space: {
      double m = 1.0;
      for (int i = 0; i < n; ++i)
        m *= i == axis ? clip_len(offset, box_hi(i), box_lo(i), box_hi(i)) : grid.extent(i);
      return m;
    }
    case SetKind::fat_cantor: {
      double m = 1.0;
      for (int i = 0; i < n; ++i) {
        std::vector<Interval> kept, gaps;
        cantor_intervals(*this, lo[i], hi[i], kept, gaps);
        double len = 0.0;
        for (const auto& iv : kept) len += clip_len(iv.a, iv.b, box_lo(i), box_hi(i));
        m *= len;
      }
      return m;
    }
    case SetKind::fat_carpet: {
      std::vector<Square> kept, holes;
      carpet_squares(*this, kept, holes);
      double m = 0.0;
      for (const auto& sq : kept)
        m += clip_len(sq.x0, sq.x0 + sq.side, box_lo(0), box_hi(0)) *
             clip_len(sq.y0, sq.y0 + sq.side, box_lo(1), box_hi(1));
      return m;
    }
    case SetKind::lipschitz_subgraph: {
      // The graph is piecewise linear, so a fine midpoint rule on each piece is exact
      // up to the clipping kinks; 4096 sub-steps per piece is plenty.
      const std::size_t pieces = graph_samples.size() - 1;
      const double w = (hi[0] - lo[0]) / pieces;
      double m = 0.0;
      const int sub = 4096;
      for (std::size_t k = 0; k < pieces; ++k)
        for (int j = 0; j < sub; ++j) {
          const double x = lo[0] + (k + (j + 0.5) / sub) * w;
          if (x < box_lo(0) || x > box_hi(0)) continue;
          m += clip_len(lo[1], lipschitz_g(*this, x), box_lo(1), box_hi(1)) * (w / sub);
        }
      return m;
    }
    case SetKind::union_of: {
      double m = 0.0;
      for (const auto& p : parts) m += p.nominal_measure(grid);  // parts are assumed disjoint
      return m;
    }
  }
  return 0.0;
}

std::size_t SetSpec::boundary_pieces() const {
  switch (kind) {
    case SetKind::box: return 2;
    case SetKind::half_space: return 1;
    case SetKind::fat_cantor: return std::size_t{2} << generations;
    case SetKind::fat_carpet: {
      std::size_t holes = 0, live = 1;
      for (int p : splits) {
        holes += live;
        live *= static_cast<std::size_t>(p * p - 1);
      }
      return 4 * holes + 4;
    }
    case SetKind::lipschitz_subgraph: return graph_samples.size() + 2;
    case SetKind::union_of: {
      std::size_t s = 0;
      for (const auto& p : parts) s += p.boundary_pieces();
      return s;
    }
  }
  return 0;
}

CellSet rasterize(const SetSpec& spec, const Grid& grid) {
  std::vector<std::uint8_t> bits(grid.size(), 0);
  rasterize_into(spec, grid, bits);
  return CellSet(grid, std::move(bits));
}

std::vector<double> default_regularity_radii(const Grid& grid) {
  std::vector<double> r;
  for (int j = 0;; ++j) {
    const double t = grid.h() * std::exp2(j / 4.0);
    if (t > grid.r_max() * (1 + 1e-12)) break;
    r.push_back(t);
  }
  return r;
}

RegularityEstimate estimate_regularity(const CellSet& s, const std::vector<double>& radii_in,
                                       const RegularityOptions& opts) {
  const Grid& g = s.grid();
  const auto cells = s.indices();
  if (cells.empty()) throw Error("estimate_regularity: S is empty");
  if (radii_in.empty()) throw Error("estimate_regularity: no radii");
  std::vector<double> radii = radii_in;
  std::sort(radii.begin(), radii.end());

  RegularityEstimate est;
  est.radii = radii;
  est.center_stride = std::max<std::size_t>(1, (cells.size() + opts.max_centers - 1) / opts.max_centers);
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < cells.size(); i += est.center_stride) centers.push_back(cells[i]);
  est.centers_sampled = centers.size();

  const PrefixSum<std::int64_t> sat(g, [&](std::size_t f) { return s.contains(f) ? 1 : 0; });
  std::vector<double> per_radius(radii.size(), 1.0);
  std::vector<double> ratios(centers.size());
  for (std::size_t j = 0; j < radii.size(); ++j) {
    parallel_for(0, centers.size(), [&](std::size_t c) {
      const Cube q{g.center(centers[c]), radii[j]};
      Index lo{}, hi{};
      g.cube_range(q, lo, hi);
      double full = 1.0;
      for (int i = 0; i < g.n(); ++i) full *= std::max(0, hi[i] - lo[i] + 1);
      const double inside = static_cast<double>(sat.sum(lo, hi));
      ratios[c] = full / inside;
    });
    per_radius[j] = *std::max_element(ratios.begin(), ratios.end());
  }

  est.theta_by_delta.resize(radii.size());
  double run = 1.0;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    run = std::max(run, per_radius[j]);
    est.theta_by_delta[j] = run;
  }

  const double floor = opts.delta_floor_cells * g.h();
  double theta_min = kInf;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double d = 2.0 * radii[j];
    if (d + 1e-12 * g.h() < floor || d > opts.delta_cap) continue;
    theta_min = std::min(theta_min, est.theta_by_delta[j]);
  }
  if (!std::isfinite(theta_min)) throw Error("estimate_regularity: no radius satisfies the delta floor/cap");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double d = 2.0 * radii[j];
    if (d + 1e-12 * g.h() < floor || d > opts.delta_cap) continue;
    if (est.theta_by_delta[j] <= theta_min * (1.0 + opts.theta_slack)) {
      est.delta = d;
      est.theta = est.theta_by_delta[j];
    }
  }
  return est;
}

RegularSet make_regular_set(CellSet cells, const RegularityOptions& opts, double theta_override,
                            double delta_override) {
  if (cells.empty()) throw Error("degenerate spec: empty mask");
  RegularSet s;
  s.index = std::make_shared<NearestIndex>(cells);
  s.estimate = estimate_regularity(cells, default_regularity_radii(cells.grid()), opts);
  s.theta = theta_override > 0.0 ? theta_override : s.estimate.theta;
  s.delta = delta_override > 0.0 ? delta_override : s.estimate.delta;
  s.cells = std::move(cells);
  return s;
}

RegularSet generate_set(const SetSpec& spec, const Grid& grid, const RegularityOptions& opts) {
  CellSet mask = rasterize(spec, grid);
  if (mask.empty()) throw Error("degenerate spec: rasterised mask is empty");
  return make_regular_set(std::move(mask), opts);
}

NearestResult nearest_point(const RegularSet& s, const Point& x) { return s.nearest(x); }

}  // namespace regext

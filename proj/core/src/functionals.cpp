#include "regext/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regext/parallel.hpp"

namespace regext {

namespace {

double lp_sum_norm(const std::vector<double>& values, const std::vector<std::size_t>& cells, double p, double w) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t c : cells) m = std::max(m, std::abs(values[c]));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t c : cells) s += values[c] * values[c];
  } else if (p == 1.0) {
    for (std::size_t c : cells) s += std::abs(values[c]);
  } else {
    for (std::size_t c : cells) s += std::pow(std::abs(values[c]), p);
  }
  return std::pow(s * w, 1.0 / p);
}

// Weights for int F(floor(t/h))^q dt/t over [t_0, t_{count-1}] when F is known at the ladder's
// half-widths only: F^q is interpolated linearly in log m between sampled half-widths. Repeated
// half-widths get weight 0.
std::vector<double> step_weights(const std::vector<double>& t, std::size_t count, double h) {
  std::vector<double> w(count, 0.0);
  if (count < 2) return w;
  std::vector<std::size_t> at;
  std::vector<int> ms;
  for (std::size_t j = 0; j < count; ++j) {
    const int m = static_cast<int>(std::floor(t[j] / h + 1e-9));
    if (ms.empty() || m != ms.back()) {
      ms.push_back(m);
      at.push_back(j);
    }
  }
  const double lo = t.front(), hi = t[count - 1];
  std::size_t a = 0;
  for (int m = ms.front(); m <= ms.back(); ++m) {
    const double len = std::log(std::min((m + 1) * h, hi) / std::max(m * h, lo));
    if (!(len > 0.0)) continue;
    while (a + 1 < ms.size() && ms[a + 1] <= m) ++a;
    if (ms[a] == m || a + 1 == ms.size()) {
      w[at[a]] += len;
      continue;
    }
    const double lam = std::log(static_cast<double>(m) / ms[a]) / std::log(static_cast<double>(ms[a + 1]) / ms[a]);
    w[at[a]] += (1.0 - lam) * len;
    w[at[a + 1]] += lam * len;
  }
  return w;
}

// (int (g / r^s)^q dt/t)^{1/q} over the first `count` ladder values, sup when q = inf.
// h > 0 marks an integrand that is constant between integer half-widths.
double aggregate(const std::vector<double>& g, const std::vector<double>& t, const std::vector<double>& r,
                 std::size_t count, double s, double q, double h) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t j = 0; j < count; ++j) m = std::max(m, g[j] / std::pow(r[j], s));
    return m;
  }
  std::vector<double> v(count);
  for (std::size_t j = 0; j < count; ++j) v[j] = std::pow(g[j] / std::pow(r[j], s), q);
  if (h > 0.0) {
    const std::vector<double> w = step_weights(t, count, h);
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j)
      if (w[j] > 0.0) acc += w[j] * v[j];
    return std::pow(acc, 1.0 / q);
  }
  return std::pow(log_trapezoid(t, v, 0, count == 0 ? 0 : count - 1), 1.0 / q);
}

std::vector<Index> lattice_directions(int n) {
  std::vector<Index> dirs;
  Index d{0, 0, 0};
  const int lim[3] = {1, n > 1 ? 1 : 0, n > 2 ? 1 : 0};
  for (d[0] = -lim[0]; d[0] <= lim[0]; ++d[0])
    for (d[1] = -lim[1]; d[1] <= lim[1]; ++d[1])
      for (d[2] = -lim[2]; d[2] <= lim[2]; ++d[2]) {
        // keep one of each +-pair: first nonzero component positive
        int first = 0;
        for (int i = 0; i < 3 && first == 0; ++i) first = d[i];
        if (first > 0) dirs.push_back(d);
      }
  return dirs;
}

double binomial(int k, int j) {
  double b = 1.0;
  for (int i = 1; i <= j; ++i) b = b * (k - j + i) / i;
  return b;
}

}  // namespace

std::string to_string(Space space) {
  switch (space) {
    case Space::sharp: return "sharp";
    case Space::sobolev: return "sobolev";
    case Space::triebel_lizorkin: return "tl";
    case Space::besov: return "besov";
  }
  return "?";
}

Space space_from_string(const std::string& name) {
  if (name == "sharp") return Space::sharp;
  if (name == "sobolev" || name == "W") return Space::sobolev;
  if (name == "tl" || name == "F") return Space::triebel_lizorkin;
  if (name == "besov" || name == "B") return Space::besov;
  throw Error("unknown space '" + name + "'");
}

std::string to_string(WholeSpace kind) {
  switch (kind) {
    case WholeSpace::calderon: return "calderon";
    case WholeSpace::triebel_lizorkin: return "tl";
    case WholeSpace::besov_modulus: return "besov_modulus";
    case WholeSpace::besov_localapprox: return "besov_localapprox";
  }
  return "?";
}

std::string admissibility_violation(const SpaceParams& v, Space target) {
  if (!(v.s >= 0.0)) return "s >= 0";
  if (v.k < 0) return "k >= 0";
  if (!(v.q > 0.0)) return "q > 0";
  if (!(v.u >= 1.0)) return "u >= 1";
  if (!(v.p > 0.0)) return "p > 0";
  switch (target) {
    case Space::sharp:
      if (std::isinf(v.q) ? !(v.s <= v.k) : !(v.s < v.k)) return std::isinf(v.q) ? "s <= k" : "s < k when q < inf";
      return "";
    case Space::sobolev:
      if (v.k < 1) return "k >= 1";
      if (!(v.p > 1.0)) return "p > 1";
      if (v.s != v.k) return "s = k";
      if (!std::isinf(v.q)) return "q = inf";
      if (v.u != 1.0) return "u = 1";
      return "";
    case Space::triebel_lizorkin:
      if (!(v.s > 0.0 && v.s < v.k)) return "0 < s < k";
      if (!(v.p > 1.0 && std::isfinite(v.p))) return "1 < p < inf";
      if (!(v.q >= 1.0)) return "1 <= q <= inf";
      if (v.u != 1.0) return "u = 1";
      return "";
    case Space::besov:
      if (!(v.s > 0.0 && v.s < v.k)) return "0 < s < k";
      if (!(v.u <= v.p)) return "1 <= u <= p <= inf";
      return "";
  }
  return "";
}

void require_admissible(const SpaceParams& v, Space target) {
  const std::string why = admissibility_violation(v, target);
  if (!why.empty()) throw Error("inadmissible parameters for " + to_string(target) + ": requires " + why);
}

bool unvalidated_q(const SpaceParams& v) { return v.q < 0.25; }

int sharp_order(double alpha) {
  if (alpha < 0.0) throw Error("sharp order requires alpha >= 0");
  return static_cast<int>(-std::floor(-alpha));
}

RadiusLadder::RadiusLadder(double h, double cap, double density) : h_(h), density_(density) {
  if (!(h > 0.0) || !(density > 0.0)) throw Error("radius ladder needs h > 0 and density > 0");
  t_.push_back(h);
  for (int j = 1;; ++j) {
    const double t = h * std::exp2(j / density);
    if (t > cap * (1.0 + 1e-12)) break;
    t_.push_back(t);
  }
}

std::size_t RadiusLadder::count_upto(double cap) const {
  std::size_t c = 0;
  while (c < t_.size() && t_[c] <= cap * (1.0 + 1e-12)) ++c;
  return c;
}

std::size_t RadiusLadder::index_of(double t) const {
  const double j = std::round(density_ * std::log2(t / h_));
  if (j < 0 || j >= static_cast<double>(t_.size()) || std::abs(t_[static_cast<std::size_t>(j)] - t) > 1e-9 * t)
    throw Error("radius is not on the ladder");
  return static_cast<std::size_t>(j);
}

double log_trapezoid(const std::vector<double>& t, const std::vector<double>& g, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t j = lo; j < hi; ++j) s += 0.5 * (g[j] + g[j + 1]) * std::log(t[j + 1] / t[j]);
  return s;
}

int footprint_halfwidth(double t, double h) { return static_cast<int>(std::floor(t / h + 1e-9)); }

double effective_radius(double t, double h) { return (footprint_halfwidth(t, h) + 0.5) * h; }

LocalApproxField::LocalApproxField(const GridFunction& f, const CellSet* mask, int k, const RadiusLadder& ladder,
                                   const FieldOptions& opts)
    : grid_(f.grid()), ladder_(ladder), k_(k), masked_(mask != nullptr), opts_(opts) {
  if (mask && mask->grid() != grid_) throw Error("field: mask and function live on different grids");
  if (k < 0) throw Error("field: k >= 0");
  const int n = grid_.n();
  const double h = grid_.h();
  domain_.assign(grid_.size(), 1);
  if (mask) domain_ = mask->bits();
  for (std::size_t c = 0; c < grid_.size(); ++c)
    if (domain_[c]) cells_.push_back(c);
  domain_sum_ = PrefixSum<std::int64_t>(grid_, [&](std::size_t c) { return domain_[c] ? 1 : 0; });

  ladder_m_.resize(ladder.size());
  for (std::size_t j = 0; j < ladder.size(); ++j) ladder_m_[j] = footprint_halfwidth(ladder[j], h);

  const auto& dims = grid_.dims();
  for (int m : ladder_m_) {
    if (layers_.count(m)) continue;
    Layer& l = layers_[m];
    l.m = m;
    if (opts.stride_factor > 0.0 && m >= 2.0 * opts.stride_factor)
      l.stride = 1 << static_cast<int>(std::floor(std::log2(m / opts.stride_factor)));
    for (int i = 0; i < kMaxDim; ++i) {
      const int d = i < n ? dims[i] : 1;
      auto& coord = l.coord[i];
      for (int c = 0; c < d; c += l.stride) coord.push_back(c);
      if (coord.back() != d - 1) coord.push_back(d - 1);
      l.lattice_dims[i] = static_cast<int>(coord.size());
      l.lo[i].assign(d, 0);
      l.w[i].assign(d, 0.0);
      std::size_t a = 0;
      for (int c = 0; c < d; ++c) {
        while (a + 1 < coord.size() && coord[a + 1] <= c) ++a;
        l.lo[i][c] = static_cast<int>(a);
        l.w[i][c] = a + 1 < coord.size() ? double(c - coord[a]) / double(coord[a + 1] - coord[a]) : 0.0;
      }
    }
    const std::size_t lattice_size =
        static_cast<std::size_t>(l.lattice_dims[0]) * l.lattice_dims[1] * l.lattice_dims[2];
    std::vector<std::uint8_t> needed(lattice_size, 0);
    for (std::size_t c : cells_) {
      const Index idx = grid_.multi(c);
      int a[3], b[3];
      for (int i = 0; i < 3; ++i) {
        const int x = i < n ? idx[i] : 0;
        a[i] = l.lo[i][x];
        b[i] = l.w[i][x] > 0.0 ? a[i] + 1 : a[i];
      }
      for (int x0 = a[0]; x0 <= b[0]; ++x0)
        for (int x1 = a[1]; x1 <= b[1]; ++x1)
          for (int x2 = a[2]; x2 <= b[2]; ++x2)
            needed[(static_cast<std::size_t>(x0) * l.lattice_dims[1] + x1) * l.lattice_dims[2] + x2] = 1;
    }
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < lattice_size; ++i)
      if (needed[i]) todo.push_back(i);
    l.e1.assign(lattice_size, 0.0);
    l.e2.assign(lattice_size, 0.0);
    l.einf.assign(lattice_size, 0.0);
    if (opts.extra_u > 0.0) l.ex.assign(lattice_size, 0.0);
    const double r = (m + 0.5) * h;
    const double vol = std::pow(2.0 * r, n);
    parallel_for(0, todo.size(), [&](std::size_t t) {
      thread_local FitWorkspace ws;
      const std::size_t li = todo[t];
      const int x2 = static_cast<int>(li % l.lattice_dims[2]);
      const int x1 = static_cast<int>((li / l.lattice_dims[2]) % l.lattice_dims[1]);
      const int x0 = static_cast<int>(li / (static_cast<std::size_t>(l.lattice_dims[2]) * l.lattice_dims[1]));
      const Index idx{l.coord[0][x0], l.coord[1][x1], l.coord[2][x2]};
      const Cube q{grid_.center(idx), r};
      const LocalErrors e = cube_fit_errors(f, mask, q, k, opts.extra_u, ws);
      l.e1[li] = e.l1 / vol;
      l.e2[li] = std::sqrt(e.l2sq / vol);
      l.einf[li] = e.linf;
      if (opts.extra_u > 0.0) l.ex[li] = std::pow(e.lp / vol, 1.0 / opts.extra_u);
    });
  }
}

int LocalApproxField::slot(double u) const {
  if (u == 1.0) return 0;
  if (u == 2.0) return 1;
  if (std::isinf(u)) return 2;
  if (opts_.extra_u > 0.0 && u == opts_.extra_u) return 3;
  throw Error("field: inner exponent not evaluated");
}

const std::vector<double>& LocalApproxField::values(const Layer& l, double u) const {
  switch (slot(u)) {
    case 0: return l.e1;
    case 1: return l.e2;
    case 2: return l.einf;
    default: return l.ex;
  }
}

const LocalApproxField::Layer& LocalApproxField::layer_for(double r) const {
  auto it = layers_.find(footprint_halfwidth(r, grid_.h()));
  if (it == layers_.end()) throw Error("field: radius not evaluated");
  return it->second;
}

double LocalApproxField::at_radius(std::size_t cell, double r, double u) const {
  const Layer& l = layer_for(r);
  const auto& v = values(l, u);
  const Index idx = grid_.multi(cell);
  const int n = grid_.n();
  int a[3];
  double w[3];
  for (int i = 0; i < 3; ++i) {
    const int x = i < n ? idx[i] : 0;
    a[i] = l.lo[i][x];
    w[i] = l.w[i][x];
  }
  if (w[0] == 0.0 && w[1] == 0.0 && w[2] == 0.0)
    return v[(static_cast<std::size_t>(a[0]) * l.lattice_dims[1] + a[1]) * l.lattice_dims[2] + a[2]];
  double s = 0.0;
  for (int c0 = 0; c0 < 2; ++c0) {
    const double w0 = c0 ? w[0] : 1.0 - w[0];
    if (w0 == 0.0) continue;
    for (int c1 = 0; c1 < 2; ++c1) {
      const double w1 = c1 ? w[1] : 1.0 - w[1];
      if (w1 == 0.0) continue;
      for (int c2 = 0; c2 < 2; ++c2) {
        const double w2 = c2 ? w[2] : 1.0 - w[2];
        if (w2 == 0.0) continue;
        s += w0 * w1 * w2 *
             v[(static_cast<std::size_t>(a[0] + c0) * l.lattice_dims[1] + a[1] + c1) * l.lattice_dims[2] + a[2] + c2];
      }
    }
  }
  return s;
}

double LocalApproxField::at(std::size_t cell, std::size_t j, double u) const {
  return at_radius(cell, ladder_[j], u);
}

std::vector<double> LocalApproxField::layer(std::size_t j, double u) const {
  std::vector<double> out(grid_.size(), 0.0);
  for (std::size_t c : cells_) out[c] = at(c, j, u);
  return out;
}

const std::vector<double>& LocalApproxField::norm_curve(double u, double p) const {
  {
    std::lock_guard<std::mutex> lock(*memo_mutex_);
    auto it = curves_.find({u, p});
    if (it != curves_.end()) return it->second;
  }
  slot(u);
  std::vector<double> curve(ladder_.size(), 0.0);
  const double w = grid_.cell_volume();
  parallel_for(0, ladder_.size(), [&](std::size_t j) {
    const std::vector<double> v = layer(j, u);
    curve[j] = lp_sum_norm(v, cells_, p, w);
  });
  std::lock_guard<std::mutex> lock(*memo_mutex_);
  return curves_.emplace(std::make_pair(u, p), std::move(curve)).first->second;
}

std::int64_t LocalApproxField::domain_count(std::size_t cell, int m) const {
  const Index idx = grid_.multi(cell);
  Index lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < grid_.n(); ++i) {
    lo[i] = std::max(0, idx[i] - m);
    hi[i] = std::min(grid_.dims()[i] - 1, idx[i] + m);
  }
  return domain_sum_.sum(lo, hi);
}

GridFunction generalized_sharp(const LocalApproxField& field, const SpaceParams& v, double cap) {
  require_admissible(v, Space::sharp);
  if (field.k() != v.k) throw Error("generalized sharp: field order differs from k");
  if (!(cap > 0.0)) throw Error("generalized sharp: cap must be positive");
  const RadiusLadder& ladder = field.ladder();
  const std::size_t count = ladder.count_upto(cap);
  const double h = field.grid().h();
  std::vector<double> r(count), rs(count);
  for (std::size_t j = 0; j < count; ++j) {
    r[j] = effective_radius(ladder[j], h);
    rs[j] = std::pow(r[j], -v.s);
  }
  const std::vector<double> w = step_weights(ladder.values(), count, h);
  GridFunction out(field.grid(), 0.0);
  const auto& cells = field.domain_cells();
  parallel_for(0, cells.size(), [&](std::size_t i) {
    const std::size_t c = cells[i];
    double acc = 0.0;
    if (std::isinf(v.q)) {
      for (std::size_t j = 0; j < count; ++j) acc = std::max(acc, field.at(c, j, v.u) * rs[j]);
      out[c] = acc;
    } else {
      for (std::size_t j = 0; j < count; ++j) {
        const double g = field.at(c, j, v.u) * rs[j];
        if (g > 0.0) acc += w[j] * std::pow(g, v.q);
      }
      out[c] = std::pow(acc, 1.0 / v.q);
    }
  });
  return out;
}

GridFunction generalized_sharp(const GridFunction& f, const CellSet& s, const SpaceParams& v, double cap,
                               const RadiusLadder& ladder, const FieldOptions& opts) {
  FieldOptions o = opts;
  if (std::isfinite(v.u) && v.u != 1.0 && v.u != 2.0) o.extra_u = v.u;
  const LocalApproxField field(f, &s, v.k, ladder, o);
  return generalized_sharp(field, v, cap);
}

GridFunction sharp_maximal(const LocalApproxField& field, double alpha) {
  const SpaceParams v{alpha, sharp_order(alpha), 2.0, kInf, 1.0};
  return generalized_sharp(field, v, kInf);
}

GridFunction sharp_maximal(const GridFunction& f, const CellSet& s, double alpha, const RadiusLadder& ladder,
                           const FieldOptions& opts) {
  const LocalApproxField field(f, &s, sharp_order(alpha), ladder, opts);
  return sharp_maximal(field, alpha);
}

GridFunction hl_maximal(const GridFunction& g, double u, const RadiusLadder& ladder) {
  if (!(u > 0.0)) throw Error("hl_maximal requires u > 0");
  const Grid& grid = g.grid();
  GridFunction out(grid, 0.0);
  if (std::isinf(u)) {
    for (std::size_t c = 0; c < grid.size(); ++c) out[c] = std::abs(g[c]);
    return out;
  }
  const PrefixSum<double> ps(grid, [&](std::size_t c) { return std::pow(std::abs(g[c]), u); });
  std::vector<int> ms{0};
  for (double t : ladder.values()) {
    const int m = footprint_halfwidth(t, grid.h());
    if (ms.back() != m) ms.push_back(m);
  }
  const int n = grid.n();
  parallel_for(0, grid.size(), [&](std::size_t c) {
    const Index idx = grid.multi(c);
    double best = 0.0;
    for (int m : ms) {
      Index lo{0, 0, 0}, hi{0, 0, 0};
      for (int i = 0; i < n; ++i) {
        lo[i] = std::max(0, idx[i] - m);
        hi[i] = std::min(grid.dims()[i] - 1, idx[i] + m);
      }
      best = std::max(best, ps.sum(lo, hi) / std::pow(2.0 * m + 1.0, n));
    }
    out[c] = std::pow(std::max(best, 0.0), 1.0 / u);
  });
  return out;
}

GridFunction zero_extend(const GridFunction& f, const CellSet& s) {
  if (f.grid() != s.grid()) throw Error("zero_extend: function and set live on different grids");
  GridFunction out(f.grid(), 0.0);
  for (std::size_t c = 0; c < out.grid().size(); ++c)
    if (s.contains(c)) out[c] = f[c];
  return out;
}

double finite_difference_norm(const GridFunction& f, int k, const Index& shift, double p) {
  const Grid& g = f.grid();
  const int n = g.n();
  std::vector<double> coef(k + 1);
  for (int j = 0; j <= k; ++j) coef[j] = ((k - j) % 2 ? -1.0 : 1.0) * binomial(k, j);
  Index lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    lo[i] = std::max(0, -k * shift[i]);
    hi[i] = std::min(g.dims()[i] - 1, g.dims()[i] - 1 - k * shift[i]);
    if (lo[i] > hi[i]) return 0.0;
  }
  std::ptrdiff_t step = 0, stride = 1;
  for (int i = n - 1; i >= 0; --i) {
    step += shift[i] * stride;
    stride *= g.dims()[i];
  }
  double acc = 0.0;
  const bool sup = std::isinf(p);
  Index idx = lo;
  while (true) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(g.flat(idx));
    double d = 0.0;
    for (int j = 0; j <= k; ++j) d += coef[j] * f[static_cast<std::size_t>(base + j * step)];
    d = std::abs(d);
    if (sup) acc = std::max(acc, d);
    else if (p == 2.0) acc += d * d;
    else if (p == 1.0) acc += d;
    else acc += std::pow(d, p);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++idx[i] <= hi[i]) break;
      idx[i] = lo[i];
    }
    if (i < 0) break;
  }
  return sup ? acc : std::pow(acc * g.cell_volume(), 1.0 / p);
}

std::vector<double> modulus_continuity_curve(const GridFunction& f, int k, double p, const RadiusLadder& ladder) {
  if (k < 1) throw Error("modulus of continuity requires k >= 1");
  const Grid& g = f.grid();
  const double h = g.h();
  std::vector<int> ms;
  for (double t : ladder.values()) {
    const int m = footprint_halfwidth(t, h);
    if (m >= 1 && (ms.empty() || ms.back() != m)) ms.push_back(m);
  }
  const auto dirs = lattice_directions(g.n());
  std::vector<double> per(ms.size() * dirs.size(), 0.0);
  parallel_for(0, per.size(), [&](std::size_t i) {
    const int m = ms[i / dirs.size()];
    Index shift = dirs[i % dirs.size()];
    for (int a = 0; a < 3; ++a) shift[a] *= m;
    per[i] = finite_difference_norm(f, k, shift, p);
  });
  std::vector<double> curve(ladder.size(), 0.0);
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    const int mt = footprint_halfwidth(ladder[j], h);
    double best = 0.0;
    for (std::size_t a = 0; a < ms.size() && ms[a] <= mt; ++a)
      for (std::size_t d = 0; d < dirs.size(); ++d) best = std::max(best, per[a * dirs.size() + d]);
    curve[j] = best;
  }
  return curve;
}

double modulus_continuity(const GridFunction& f, int k, double p, double t, const RadiusLadder& ladder) {
  if (t < f.grid().h() * (1.0 - 1e-12)) throw Error("modulus of continuity requires t >= h");
  const std::size_t count = ladder.count_upto(t);
  const std::vector<double> curve = modulus_continuity_curve(f, k, p, ladder);
  return count == 0 ? 0.0 : curve[count - 1];
}

namespace {

// Greedy placement of equal discrete cubes; conflict when centers are within 2m cells (sup norm).
class PackingGrid {
 public:
  PackingGrid(const Grid& g, int reach) : g_(g), reach_(reach), side_(std::max(1, reach)) {
    for (int i = 0; i < 3; ++i) nb_[i] = i < g.n() ? g.dims()[i] / side_ + 1 : 1;
    buckets_.resize(static_cast<std::size_t>(nb_[0]) * nb_[1] * nb_[2]);
  }

  bool conflicts(const Index& idx) const {
    int b[3];
    for (int i = 0; i < 3; ++i) b[i] = i < g_.n() ? idx[i] / side_ : 0;
    for (int x = std::max(0, b[0] - 1); x <= std::min(nb_[0] - 1, b[0] + 1); ++x)
      for (int y = std::max(0, b[1] - 1); y <= std::min(nb_[1] - 1, b[1] + 1); ++y)
        for (int z = std::max(0, b[2] - 1); z <= std::min(nb_[2] - 1, b[2] + 1); ++z)
          for (const Index& o : buckets_[(static_cast<std::size_t>(x) * nb_[1] + y) * nb_[2] + z]) {
            int d = 0;
            for (int i = 0; i < g_.n(); ++i) d = std::max(d, std::abs(o[i] - idx[i]));
            if (d <= reach_) return true;
          }
    return false;
  }

  void add(const Index& idx) {
    int b[3];
    for (int i = 0; i < 3; ++i) b[i] = i < g_.n() ? idx[i] / side_ : 0;
    buckets_[(static_cast<std::size_t>(b[0]) * nb_[1] + b[1]) * nb_[2] + b[2]].push_back(idx);
  }

 private:
  const Grid& g_;
  int reach_;
  int side_;
  int nb_[3];
  std::vector<std::vector<Index>> buckets_;
};

}  // namespace

PackingResult kp_modulus(const LocalApproxField& field, double p, double u, double t, bool integral) {
  const Grid& g = field.grid();
  const double h = g.h();
  if (t < 4.0 * h * (1.0 - 1e-12)) throw Error("kp_modulus requires t >= 4h");
  if (!(p > 0.0)) throw Error("kp_modulus requires p > 0");
  const double r = 0.5 * t;
  const int m = footprint_halfwidth(r, h);
  const auto& cells = field.domain_cells();
  const double w = g.cell_volume();
  PackingResult res;
  std::vector<double> e(cells.size()), score(cells.size());
  parallel_for(0, cells.size(), [&](std::size_t i) {
    e[i] = field.at_radius(cells[i], r, u);
    score[i] = std::isinf(p) ? e[i] : static_cast<double>(field.domain_count(cells[i], m)) * w * std::pow(e[i], p);
  });
  if (integral) {
    std::vector<double> at_t(cells.size());
    parallel_for(0, cells.size(), [&](std::size_t i) { at_t[i] = field.at_radius(cells[i], t, u); });
    if (std::isinf(p)) {
      for (double v : at_t) res.integral = std::max(res.integral, v);
    } else {
      double s = 0.0;
      for (double v : at_t) s += std::pow(v, p);
      res.integral = std::pow(s * w, 1.0 / p);
    }
  }
  if (cells.empty()) return res;
  if (std::isinf(p)) {
    const std::size_t best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
    res.packing = score[best];
    res.cubes = 1;
    res.centers.push_back(cells[best]);
    return res;
  }
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  PackingGrid pg(g, 2 * m);
  double sum = 0.0;
  for (std::size_t i : order) {
    if (score[i] <= 0.0) break;
    const Index idx = g.multi(cells[i]);
    if (pg.conflicts(idx)) continue;
    pg.add(idx);
    sum += score[i];
    res.centers.push_back(cells[i]);
  }
  res.cubes = res.centers.size();
  res.packing = std::pow(sum, 1.0 / p);
  return res;
}

int split_into_packings(const Grid& g, const std::vector<std::size_t>& centers, int halfwidth) {
  std::vector<PackingGrid> colors;
  for (std::size_t c : centers) {
    const Index idx = g.multi(c);
    std::size_t k = 0;
    while (k < colors.size() && colors[k].conflicts(idx)) ++k;
    if (k == colors.size()) colors.emplace_back(g, 2 * halfwidth);
    colors[k].add(idx);
  }
  return static_cast<int>(colors.size());
}

namespace {

NormValue norm_common(Space space, const GridFunction& f, const LocalApproxField& field, const SpaceParams& v,
                      const std::vector<double>* omega) {
  require_admissible(v, space);
  if (f.grid() != field.grid()) throw Error("norm: function and field live on different grids");
  if (field.k() != v.k) throw Error("norm: field order differs from k");
  const auto& cells = field.domain_cells();
  const double w = field.grid().cell_volume();
  NormValue out;
  out.unvalidated = unvalidated_q(v);
  out.lp = lp_sum_norm(f.values(), cells, v.p, w);
  const RadiusLadder& ladder = field.ladder();
  const double h = field.grid().h();
  switch (space) {
    case Space::sobolev: {
      const GridFunction sharp = generalized_sharp(field, {static_cast<double>(v.k), v.k, v.p, kInf, 1.0}, kInf);
      out.seminorm = lp_sum_norm(sharp.values(), cells, v.p, w);
      break;
    }
    case Space::triebel_lizorkin: {
      const GridFunction g = generalized_sharp(field, v, 1.0);
      out.seminorm = lp_sum_norm(g.values(), cells, v.p, w);
      break;
    }
    case Space::besov: {
      const std::size_t count = ladder.count_upto(1.0);
      std::vector<double> r(count);
      // The modulus is constant between integer shift lengths, so its supremum sits at m*h.
      for (std::size_t j = 0; j < count; ++j)
        r[j] = !omega ? effective_radius(ladder[j], h)
               : std::isinf(v.q) ? footprint_halfwidth(ladder[j], h) * h
                                 : ladder[j];
      const std::vector<double>& curve = omega ? *omega : field.norm_curve(v.u, v.p);
      if (curve.size() < count) throw Error("norm: curve shorter than the ladder");
      out.seminorm = aggregate(curve, ladder.values(), r, count, v.s, v.q, omega ? 0.0 : h);
      break;
    }
    case Space::sharp:
      throw Error("norm: the sharp target is not a norm");
  }
  out.value = out.lp + out.seminorm;
  return out;
}

}  // namespace

NormValue trace_norm(Space space, const GridFunction& f, const LocalApproxField& field, const SpaceParams& v) {
  return norm_common(space, f, field, v, nullptr);
}

NormValue wholespace_norm(WholeSpace kind, const GridFunction& F, const LocalApproxField& field,
                          const SpaceParams& v, const std::vector<double>* omega) {
  if (field.masked()) throw Error("wholespace norm needs an unmasked field");
  switch (kind) {
    case WholeSpace::calderon: return norm_common(Space::sobolev, F, field, v, nullptr);
    case WholeSpace::triebel_lizorkin: return norm_common(Space::triebel_lizorkin, F, field, v, nullptr);
    case WholeSpace::besov_localapprox: return norm_common(Space::besov, F, field, v, nullptr);
    case WholeSpace::besov_modulus:
      if (!omega) throw Error("besov_modulus needs the modulus of continuity curve");
      return norm_common(Space::besov, F, field, v, omega);
  }
  return {};
}

}  // namespace regext

#include "regext/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "regext/prefix_sum.hpp"

namespace regext {

namespace {

bool star_leaves_box(const Cube& q, const Grid& g) {
  const Cube s = q.star();
  const double slack = 1e-12 * g.h();
  for (int i = 0; i < g.n(); ++i) {
    if (s.center[i] - s.radius < g.origin()[i] - slack) return true;
    if (s.center[i] + s.radius > g.origin()[i] + g.extent(i) + slack) return true;
  }
  return false;
}

double binom(int a, int b) {
  double r = 1.0;
  for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

}  // namespace

WhitneyDecomposition::WhitneyDecomposition(const RegularSet& s, const WhitneyOptions& opts)
    : grid_(s.grid()), opts_(opts) {
  const Grid& g = grid_;
  const int n = g.n();
  dist_ = distance_field(s.cells);

  Point c{};
  for (int i = 0; i < n; ++i) c[i] = g.origin()[i] + 0.5 * g.extent(i);
  double r0 = g.h();
  while (r0 < g.r_max()) r0 *= 2.0;
  root_ = Cube{c, r0};

  const std::size_t outside = g.size() - s.cells.count();
  if (outside == 0) {
    build_buckets();
    return;
  }
  const PrefixSum<std::int32_t> free_cells(g, [&](std::size_t f) { return s.cells.contains(f) ? 0 : 1; });

  struct Item {
    Cube q;
    int level;
  };
  std::vector<Item> stack{{root_, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    Index lo{}, hi{};
    g.cube_range(it.q, lo, hi);
    if (free_cells.sum(lo, hi) == 0) continue;

    const NearestResult a = s.nearest(it.q.center);
    const double diam = it.q.diam();
    WhitneyCube w;
    w.cube = it.q;
    w.level = it.level;
    w.anchor = a.cell;
    w.center_dist = a.distance;
    w.clipped = star_leaves_box(it.q, g);
    if (a.distance >= opts_.accept_lo * diam) {
      cubes_.push_back(w);
      continue;
    }
    const double child_r = 0.5 * it.q.radius;
    if (child_r < opts_.min_radius * (1.0 - 1e-12) || it.level >= opts_.max_level) {
      w.floor = true;
      cubes_.push_back(w);
      continue;
    }
    // Push children in reverse so they pop in lexicographic order.
    const int kids = 1 << n;
    for (int b = kids - 1; b >= 0; --b) {
      Cube child{it.q.center, child_r};
      for (int i = 0; i < n; ++i) child.center[i] += ((b >> (n - 1 - i)) & 1 ? 0.5 : -0.5) * it.q.radius;
      stack.push_back({child, it.level + 1});
    }
  }
  build_buckets();
}

void WhitneyDecomposition::build_buckets() {
  const int n = grid_.n();
  const Cube region = root_.star();
  bucket_side_ = std::max(4.0 * grid_.h(), 2.0 * region.radius / 256.0);
  for (int i = 0; i < kMaxDim; ++i) {
    if (i >= n) {
      bucket_dims_[i] = 1;
      bucket_origin_[i] = 0.0;
      continue;
    }
    bucket_origin_[i] = region.center[i] - region.radius;
    bucket_dims_[i] = static_cast<int>(std::ceil(2.0 * region.radius / bucket_side_)) + 1;
  }
  const std::size_t nb = static_cast<std::size_t>(bucket_dims_[0]) * bucket_dims_[1] * bucket_dims_[2];
  bucket_offsets_.assign(nb + 1, 0);
  for (std::size_t q = 0; q < cubes_.size(); ++q)
    for_each_bucket(cubes_[q].cube.star(), [&](std::size_t b) { ++bucket_offsets_[b + 1]; });
  for (std::size_t b = 0; b < nb; ++b) bucket_offsets_[b + 1] += bucket_offsets_[b];
  bucket_items_.assign(bucket_offsets_[nb], 0);
  std::vector<std::size_t> fill(bucket_offsets_.begin(), bucket_offsets_.end() - 1);
  for (std::size_t q = 0; q < cubes_.size(); ++q)
    for_each_bucket(cubes_[q].cube.star(),
                    [&](std::size_t b) { bucket_items_[fill[b]++] = static_cast<std::uint32_t>(q); });
}

template <class Fn>
void WhitneyDecomposition::for_each_bucket(const Cube& fp, Fn&& fn) const {
  Index lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < grid_.n(); ++i) {
    const double a = std::floor((fp.center[i] - fp.radius - bucket_origin_[i]) / bucket_side_);
    const double b = std::floor((fp.center[i] + fp.radius - bucket_origin_[i]) / bucket_side_);
    if (b < 0 || a > bucket_dims_[i] - 1) return;
    lo[i] = static_cast<int>(std::max(a, 0.0));
    hi[i] = static_cast<int>(std::min(b, bucket_dims_[i] - 1.0));
  }
  for (int x = lo[0]; x <= hi[0]; ++x)
    for (int y = lo[1]; y <= hi[1]; ++y)
      for (int z = lo[2]; z <= hi[2]; ++z)
        fn((static_cast<std::size_t>(x) * bucket_dims_[1] + y) * bucket_dims_[2] + z);
}

std::vector<std::size_t> WhitneyDecomposition::neighbors(std::size_t q) const {
  if (q >= cubes_.size()) throw Error("cube is not part of the decomposition");
  const Cube qs = cubes_[q].cube.star();
  std::vector<std::size_t> out;
  for_each_bucket(qs, [&](std::size_t b) {
    for (std::size_t k = bucket_offsets_[b]; k < bucket_offsets_[b + 1]; ++k) {
      const std::size_t id = bucket_items_[k];
      if (cubes_[id].cube.star().intersects(qs, grid_.n())) out.push_back(id);
    }
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> WhitneyDecomposition::containing(const Point& x, bool star) const {
  std::vector<std::size_t> out;
  for_each_bucket(Cube{x, 0.0}, [&](std::size_t b) {
    for (std::size_t k = bucket_offsets_[b]; k < bucket_offsets_[b + 1]; ++k) {
      const std::size_t id = bucket_items_[k];
      const Cube c = star ? cubes_[id].cube.star() : cubes_[id].cube;
      if (c.contains(x, grid_.n())) out.push_back(id);
    }
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t WhitneyDecomposition::find(const Cube& q) const {
  const double tol = 1e-12 * grid_.h();
  for (std::size_t id : containing(q.center, false)) {
    const Cube& c = cubes_[id].cube;
    if (std::abs(c.radius - q.radius) <= tol && sup_dist(c.center, q.center, grid_.n()) <= tol) return id;
  }
  throw Error("cube is not part of the decomposition");
}

WhitneyDecomposition whitney_decompose(const RegularSet& s, const WhitneyOptions& opts) {
  return WhitneyDecomposition(s, opts);
}

std::vector<std::size_t> neighbors(const WhitneyDecomposition& w, const Cube& q) { return w.neighbors(w.find(q)); }

double bump_profile(double s, int m) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  double acc = 0.0, pw = 1.0;
  for (int j = 0; j <= m; ++j) {
    acc += binom(m + j, j) * pw;
    pw *= 1.0 - s;
  }
  return 1.0 - std::pow(s, m + 1) * acc;
}

double bump(const Cube& q, const Point& x, int n, int m) {
  const double band = q.radius / 8.0;
  double v = 1.0;
  for (int i = 0; i < n && v > 0.0; ++i) v *= bump_profile((std::abs(x[i] - q.center[i]) - q.radius) / band, m);
  return v;
}

PartitionOfUnity partition_of_unity(const WhitneyDecomposition& w, const CellSet& s, int m, bool normalize) {
  const Grid& g = w.grid();
  const int n = g.n();
  PartitionOfUnity pu;
  pu.m = m;
  pu.normalized = normalize;
  pu.offsets.assign(g.size() + 1, 0);
  for (std::size_t q = 0; q < w.size(); ++q)
    for_each_cell_in(g, w[q].cube.star(), [&](std::size_t c) {
      if (!s.contains(c) && bump(w[q].cube, g.center(c), n, m) > 0.0) ++pu.offsets[c + 1];
    });
  for (std::size_t c = 0; c < g.size(); ++c) pu.offsets[c + 1] += pu.offsets[c];
  pu.cube.assign(pu.offsets.back(), 0);
  pu.phi.assign(pu.offsets.back(), 0.0);
  std::vector<std::size_t> fill(pu.offsets.begin(), pu.offsets.end() - 1);
  for (std::size_t q = 0; q < w.size(); ++q)
    for_each_cell_in(g, w[q].cube.star(), [&](std::size_t c) {
      if (s.contains(c)) return;
      const double v = bump(w[q].cube, g.center(c), n, m);
      if (v <= 0.0) return;
      pu.cube[fill[c]] = static_cast<std::uint32_t>(q);
      pu.phi[fill[c]++] = v;
    });
  if (normalize)
    for (std::size_t c = 0; c < g.size(); ++c) {
      double sum = 0.0;
      for (std::size_t k = pu.row_begin(c); k < pu.row_end(c); ++k) sum += pu.phi[k];
      if (sum > 0.0)
        for (std::size_t k = pu.row_begin(c); k < pu.row_end(c); ++k) pu.phi[k] /= sum;
    }
  return pu;
}

std::vector<std::pair<std::size_t, double>> phi_at(const WhitneyDecomposition& w, const Point& x, int m) {
  std::vector<std::pair<std::size_t, double>> out;
  double sum = 0.0;
  for (std::size_t q : w.containing(x, true)) {
    const double v = bump(w[q].cube, x, w.grid().n(), m);
    if (v > 0.0) {
      out.emplace_back(q, v);
      sum += v;
    }
  }
  for (auto& e : out) e.second /= sum;
  return out;
}

WhitneyCheck check_whitney(const WhitneyDecomposition& w, const CellSet& s, std::size_t random_points,
                           unsigned seed) {
  const Grid& g = w.grid();
  const int n = g.n();
  WhitneyCheck r;
  r.cubes = w.size();
  for (const auto& c : w.cubes()) r.flagged += c.flagged() ? 1 : 0;

  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto hits = w.containing(g.center(f), false);
    r.max_multiplicity = std::max(r.max_multiplicity, static_cast<int>(hits.size()));
    if (!s.contains(f) && hits.empty()) ++r.uncovered_cells;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < random_points; ++i) {
    Point x{};
    for (int d = 0; d < n; ++d)
      x[d] = std::uniform_real_distribution<double>(g.origin()[d], g.origin()[d] + g.extent(d))(rng);
    r.max_multiplicity = std::max(r.max_multiplicity, static_cast<int>(w.containing(x, false).size()));
  }

  for (std::size_t q = 0; q < w.size(); ++q) {
    const WhitneyCube& Q = w[q];
    const auto nb = w.neighbors(q);
    r.max_neighbors = std::max(r.max_neighbors, static_cast<int>(nb.size()));
    for (std::size_t k : nb) {
      if (k == q) continue;
      const Cube& K = w[k].cube;
      bool interior = true;
      for (int d = 0; d < n; ++d)
        interior = interior && std::abs(K.center[d] - Q.cube.center[d]) < K.radius + Q.cube.radius;
      if (interior) ++r.overlap_violations;
      if (!Q.flagged() && !w[k].flagged()) {
        const double ratio = K.diam() / Q.cube.diam();
        if (ratio < 0.25 || ratio > 4.0) ++r.ratio_violations;
      }
    }
    if (Q.flagged()) continue;
    const double ratio = Q.dist_to_set() / Q.cube.diam();
    r.max_dist_ratio = std::max(r.max_dist_ratio, ratio);
    r.min_dist_ratio = std::min(r.min_dist_ratio, ratio);
    if (ratio < 1.0 || ratio > 4.0) ++r.window_violations;
  }
  return r;
}

PartitionCheck check_partition(const WhitneyDecomposition& w, const PartitionOfUnity& pu, const CellSet& s,
                               std::size_t derivative_samples, unsigned seed) {
  const Grid& g = w.grid();
  const int n = g.n();
  PartitionCheck r;
  r.min_phi = kInf;
  r.max_phi = -kInf;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (s.contains(c)) continue;
    ++r.points;
    double sum = 0.0;
    for (std::size_t k = pu.row_begin(c); k < pu.row_end(c); ++k) {
      sum += pu.phi[k];
      r.min_phi = std::min(r.min_phi, pu.phi[k]);
      r.max_phi = std::max(r.max_phi, pu.phi[k]);
      if (pu.phi[k] > 0.0 && !w[pu.cube[k]].cube.star().contains(g.center(c), n)) ++r.support_violations;
    }
    r.max_sum_error = std::max(r.max_sum_error, std::abs(sum - 1.0));
  }
  if (r.points == 0) r.min_phi = r.max_phi = 0.0;

  if (w.empty()) return r;
  std::mt19937_64 rng(seed);
  auto value = [&](std::size_t q, const Point& x, bool& ok) {
    const auto row = phi_at(w, x, pu.m);
    if (row.empty()) ok = false;
    for (const auto& e : row)
      if (e.first == q) return e.second;
    return 0.0;
  };
  for (std::size_t i = 0; i < derivative_samples; ++i) {
    const std::size_t q = std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng);
    const Cube star = w[q].cube.star();
    Point x{};
    for (int d = 0; d < n; ++d)
      x[d] = star.center[d] + std::uniform_real_distribution<double>(-1.0, 1.0)(rng) * star.radius;
    if (s.contains(g.flat(g.locate(x)))) continue;
    const double step = 1e-3 * w[q].cube.radius;
    const double diam = w[q].cube.diam();
    for (int d = 0; d < n; ++d) {
      Point xp = x, xm = x;
      xp[d] += step;
      xm[d] -= step;
      bool ok = true;
      const double f0 = value(q, x, ok), fp = value(q, xp, ok), fm = value(q, xm, ok);
      if (!ok) continue;
      r.grad_constant = std::max(r.grad_constant, std::abs(fp - fm) / (2 * step) * diam);
      r.hessian_constant = std::max(r.hessian_constant, std::abs(fp - 2 * f0 + fm) / (step * step) * diam * diam);
    }
  }
  return r;
}

}  // namespace regext

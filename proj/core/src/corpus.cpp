#include "regext/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace regext {

using nlohmann::json;

namespace {

void cubic_bspline(double t, double w[4]) {
  const double s = 1.0 - t;
  w[0] = s * s * s / 6.0;
  w[1] = (3 * t * t * t - 6 * t * t + 4) / 6.0;
  w[2] = (-3 * t * t * t + 3 * t * t + 3 * t + 1) / 6.0;
  w[3] = t * t * t / 6.0;
}

std::string fmt(double x) {
  std::string s = std::to_string(x);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

json point_json(const Point& p) { return json::array({p[0], p[1], p[2]}); }

Point point_from(const json& j, const Point& fallback) {
  Point p = fallback;
  for (std::size_t i = 0; i < j.size() && i < 3; ++i) p[i] = j[i].get<double>();
  return p;
}

json to_json_value(const SetSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["lo"] = point_json(s.lo);
  j["hi"] = point_json(s.hi);
  switch (s.kind) {
    case SetKind::half_space:
      j["axis"] = s.axis;
      j["offset"] = s.offset;
      break;
    case SetKind::fat_cantor:
      j["generations"] = s.generations;
      j["removal"] = s.removal;
      break;
    case SetKind::fat_carpet:
      j["splits"] = s.splits;
      break;
    case SetKind::lipschitz_subgraph:
      j["graph_samples"] = s.graph_samples;
      break;
    case SetKind::union_of: {
      json parts = json::array();
      for (const auto& p : s.parts) parts.push_back(to_json_value(p));
      j["parts"] = parts;
      break;
    }
    case SetKind::box:
      break;
  }
  return j;
}

SetSpec from_json_value(const json& j) {
  SetSpec s;
  if (!j.is_object()) throw Error("set spec must be a JSON object");
  s.kind = set_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("lo")) s.lo = point_from(j["lo"], s.lo);
  if (j.contains("hi")) s.hi = point_from(j["hi"], s.hi);
  if (j.contains("axis")) s.axis = j["axis"].get<int>();
  if (j.contains("offset")) s.offset = j["offset"].get<double>();
  if (j.contains("generations")) s.generations = j["generations"].get<int>();
  if (j.contains("removal")) s.removal = j["removal"].get<std::vector<double>>();
  if (j.contains("splits")) s.splits = j["splits"].get<std::vector<int>>();
  if (j.contains("graph_samples")) s.graph_samples = j["graph_samples"].get<std::vector<double>>();
  if (j.contains("parts"))
    for (const auto& p : j["parts"]) s.parts.push_back(from_json_value(p));
  return s;
}

}  // namespace

std::string to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::constant: return "constant";
    case FunctionKind::polynomial: return "polynomial";
    case FunctionKind::cusp: return "cusp";
    case FunctionKind::sine: return "sine";
    case FunctionKind::noise: return "noise";
  }
  return "?";
}

FunctionKind function_kind_from_string(const std::string& name) {
  for (auto k : {FunctionKind::constant, FunctionKind::polynomial, FunctionKind::cusp, FunctionKind::sine,
                 FunctionKind::noise})
    if (to_string(k) == name) return k;
  throw Error("unknown function kind '" + name + "'");
}

GridFunction make_function(const FunctionSpec& spec, const Grid& grid) {
  const int n = grid.n();
  GridFunction f(grid, 0.0);
  switch (spec.kind) {
    case FunctionKind::constant:
      for (std::size_t c = 0; c < grid.size(); ++c) f[c] = spec.value;
      break;
    case FunctionKind::polynomial:
      if (spec.degree < 0) throw Error("polynomial degree must be >= 0");
      for (std::size_t c = 0; c < grid.size(); ++c) {
        const Point x = grid.center(c);
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += std::pow(x[i], spec.degree);
        if (n >= 2 && spec.degree >= 1) v += x[0] * std::pow(x[1], spec.degree - 1);
        f[c] = spec.value * v;
      }
      break;
    case FunctionKind::cusp:
      for (std::size_t c = 0; c < grid.size(); ++c)
        f[c] = spec.value * std::pow(sup_dist(grid.center(c), spec.x0, n), spec.sigma);
      break;
    case FunctionKind::sine:
      for (std::size_t c = 0; c < grid.size(); ++c) {
        const Point x = grid.center(c);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += x[i];
        f[c] = spec.value * std::sin(M_PI * spec.lambda * s);
      }
      break;
    case FunctionKind::noise: {
      if (spec.lattice < 1) throw Error("noise lattice must be >= 1");
      const int m = spec.lattice + 3;
      Index dims{1, 1, 1};
      for (int i = 0; i < n; ++i) dims[i] = m;
      std::mt19937 rng(spec.seed);
      std::normal_distribution<double> normal;
      std::vector<double> lat(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
      for (double& v : lat) v = normal(rng);
      for (std::size_t c = 0; c < grid.size(); ++c) {
        const Point x = grid.center(c);
        int base[3] = {0, 0, 0};
        double w[3][4] = {{1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};
        for (int i = 0; i < n; ++i) {
          const double u = (x[i] - grid.origin()[i]) / grid.extent(i) * spec.lattice;
          const int k = std::clamp(static_cast<int>(std::floor(u)), 0, spec.lattice - 1);
          base[i] = k;  // lattice index k + 1 is node k, so nodes k - 1 .. k + 2 sit at k .. k + 3
          cubic_bspline(u - k, w[i]);
        }
        double v = 0.0;
        const int span[3] = {4, n > 1 ? 4 : 1, n > 2 ? 4 : 1};
        for (int a = 0; a < span[0]; ++a)
          for (int b = 0; b < span[1]; ++b)
            for (int d = 0; d < span[2]; ++d) {
              const std::size_t idx = (static_cast<std::size_t>(base[0] + a) * dims[1] + (n > 1 ? base[1] + b : 0)) *
                                          dims[2] +
                                      (n > 2 ? base[2] + d : 0);
              v += w[0][a] * w[1][b] * w[2][d] * lat[idx];
            }
        f[c] = spec.value * v;
      }
      break;
    }
  }
  return f;
}

std::vector<FunctionSpec> default_functions(const RegularSet& s, int max_degree, unsigned seed,
                                            const Point& anchor) {
  std::vector<FunctionSpec> out;
  FunctionSpec c;
  c.kind = FunctionKind::constant;
  c.name = "const";
  out.push_back(c);
  for (int d = 1; d <= max_degree; ++d) {
    FunctionSpec p;
    p.kind = FunctionKind::polynomial;
    p.degree = d;
    p.name = "poly" + std::to_string(d);
    out.push_back(p);
  }
  const Point x0 = s.cells.empty() ? anchor : s.nearest(anchor).point;
  for (double sigma : {0.5, 1.5}) {
    FunctionSpec q;
    q.kind = FunctionKind::cusp;
    q.sigma = sigma;
    q.x0 = x0;
    q.name = "cusp" + fmt(sigma);
    out.push_back(q);
  }
  for (double lambda : {1.0, 4.0}) {
    FunctionSpec q;
    q.kind = FunctionKind::sine;
    q.lambda = lambda;
    q.name = "sin" + fmt(lambda);
    out.push_back(q);
  }
  FunctionSpec nz;
  nz.kind = FunctionKind::noise;
  nz.seed = seed;
  nz.name = "noise";
  out.push_back(nz);
  return out;
}

std::vector<CorpusSet> default_corpus() {
  std::vector<CorpusSet> out;
  const Point lo1{-1, 0, 0}, hi1{3, 0, 0};
  {
    CorpusSet c{"fat_cantor", 1, {}, lo1, hi1, {2048, 4096}};
    c.spec.kind = SetKind::fat_cantor;
    c.spec.lo = {0, 0, 0};
    c.spec.hi = {1, 0, 0};
    c.spec.generations = 4;
    out.push_back(c);
  }
  {
    CorpusSet c{"half_line", 1, {}, lo1, hi1, {2048, 4096}};
    c.spec.kind = SetKind::half_space;
    c.spec.axis = 0;
    c.spec.offset = 0.0;
    out.push_back(c);
  }
  {
    CorpusSet c{"two_intervals", 1, {}, lo1, hi1, {2048, 4096}};
    c.spec.kind = SetKind::union_of;
    SetSpec a, b;
    a.lo = {0, 0, 0};
    a.hi = {0.4, 0, 0};
    b.lo = {0.6, 0, 0};
    b.hi = {1, 0, 0};
    c.spec.parts = {a, b};
    out.push_back(c);
  }
  const Point lo2{-0.5, -0.5, 0}, hi2{1.5, 1.5, 0};
  {
    CorpusSet c{"fat_carpet", 2, {}, lo2, hi2, {128, 256}};
    c.spec.kind = SetKind::fat_carpet;
    c.spec.lo = {0, 0, 0};
    c.spec.hi = {1, 1, 0};
    c.spec.splits = {3, 5};
    out.push_back(c);
  }
  {
    CorpusSet c{"square", 2, {}, lo2, hi2, {128, 256}};
    c.spec.kind = SetKind::box;
    c.spec.lo = {0, 0, 0};
    c.spec.hi = {1, 1, 0};
    out.push_back(c);
  }
  {
    CorpusSet c{"lipschitz", 2, {}, lo2, hi2, {128, 256}};
    c.spec.kind = SetKind::lipschitz_subgraph;
    c.spec.lo = {0, 0, 0};
    c.spec.hi = {1, 1, 0};
    out.push_back(c);
  }
  return out;
}

Grid corpus_grid(const CorpusSet& c, int cells) {
  if (cells < 1) throw Error("corpus grid needs at least one cell per axis");
  const double h = (c.box_hi[0] - c.box_lo[0]) / cells;
  Index dims{1, 1, 1};
  for (int i = 0; i < c.n; ++i) {
    const double ext = c.box_hi[i] - c.box_lo[i];
    dims[i] = static_cast<int>(std::lround(ext / h));
  }
  return Grid(c.n, dims, c.box_lo, h);
}

SetSpec parse_set_spec(const std::string& text) {
  try {
    return from_json_value(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("set spec: ") + e.what());
  }
}

std::string set_spec_json(const SetSpec& spec) { return to_json_value(spec).dump(); }

FunctionSpec parse_function_spec(const std::string& text) {
  try {
    const json j = json::parse(text);
    FunctionSpec f;
    f.kind = function_kind_from_string(j.at("kind").get<std::string>());
    f.name = j.value("name", to_string(f.kind));
    f.value = j.value("value", f.value);
    f.degree = j.value("degree", f.degree);
    f.sigma = j.value("sigma", f.sigma);
    if (j.contains("x0")) f.x0 = point_from(j["x0"], f.x0);
    f.lambda = j.value("lambda", f.lambda);
    f.seed = j.value("seed", f.seed);
    f.lattice = j.value("lattice", f.lattice);
    return f;
  } catch (const json::exception& e) {
    throw Error(std::string("function spec: ") + e.what());
  }
}

std::string function_spec_json(const FunctionSpec& f) {
  json j;
  j["kind"] = to_string(f.kind);
  j["name"] = f.name;
  j["value"] = f.value;
  switch (f.kind) {
    case FunctionKind::polynomial: j["degree"] = f.degree; break;
    case FunctionKind::cusp:
      j["sigma"] = f.sigma;
      j["x0"] = point_json(f.x0);
      break;
    case FunctionKind::sine: j["lambda"] = f.lambda; break;
    case FunctionKind::noise:
      j["seed"] = f.seed;
      j["lattice"] = f.lattice;
      break;
    case FunctionKind::constant: break;
  }
  return j.dump();
}

}  // namespace regext

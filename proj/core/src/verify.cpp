#include "regext/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "regext/distance.hpp"
#include "regext/extension.hpp"
#include "regext/functionals.hpp"
#include "regext/parallel.hpp"

namespace regext {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string>& verify_groups() {
  static const std::vector<std::string> groups{"whitney",  "partition", "quasicube",   "reproduction",
                                               "near_best", "extension", "pointwise",  "maximal",
                                               "moduli",    "equivalence", "quadrature"};
  return groups;
}

VerifyConfig default_verify_config() {
  VerifyConfig c;
  c.sets = default_corpus();
  return c;
}

namespace {

double number_from(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    throw Error("expected a number or \"inf\", got \"" + s + "\"");
  }
  return j.get<double>();
}

std::vector<double> numbers_from(const json& j, bool allow_p) {
  std::vector<double> out;
  for (const auto& x : j) {
    if (allow_p && x.is_string() && x.get<std::string>() == "p") {
      out.push_back(0.0);
      continue;
    }
    out.push_back(number_from(x));
  }
  return out;
}

CorpusSet corpus_set_from(const json& j) {
  const auto defaults = default_corpus();
  auto find_default = [&](const std::string& name) -> const CorpusSet* {
    for (const auto& c : defaults)
      if (c.name == name) return &c;
    return nullptr;
  };
  if (j.is_string()) {
    const auto* c = find_default(j.get<std::string>());
    if (!c) throw Error("unknown corpus set '" + j.get<std::string>() + "'");
    return *c;
  }
  const std::string name = j.at("name").get<std::string>();
  CorpusSet c;
  if (const auto* d = find_default(name); d && !j.contains("spec")) {
    c = *d;
  } else {
    c.name = name;
    c.n = j.at("n").get<int>();
    c.spec = parse_set_spec(j.at("spec").dump());
    for (int i = 0; i < c.n; ++i) {
      c.box_lo[i] = j.at("box_lo").at(i).get<double>();
      c.box_hi[i] = j.at("box_hi").at(i).get<double>();
    }
    c.resolutions = {64, 128};
  }
  if (j.contains("resolutions")) c.resolutions = j["resolutions"].get<std::vector<int>>();
  if (c.resolutions.empty()) throw Error("corpus set '" + c.name + "' has no resolutions");
  return c;
}

}  // namespace

VerifyConfig parse_verify_config(const std::string& text) {
  VerifyConfig c = default_verify_config();
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error("verify config must be a JSON object");
    if (j.contains("sets")) {
      c.sets.clear();
      for (const auto& s : j["sets"]) c.sets.push_back(corpus_set_from(s));
    }
    if (j.contains("functions"))
      for (const auto& f : j["functions"]) c.functions.push_back(parse_function_spec(f.dump()));
    c.max_degree = j.value("max_degree", c.max_degree);
    if (j.contains("params")) {
      const json& p = j["params"];
      if (p.contains("s")) c.s_values = numbers_from(p["s"], false);
      if (p.contains("k")) c.k_values = p["k"].get<std::vector<int>>();
      if (p.contains("p")) c.p_values = numbers_from(p["p"], false);
      if (p.contains("q")) c.q_values = numbers_from(p["q"], false);
      if (p.contains("u")) c.u_values = numbers_from(p["u"], true);
    }
    c.ladder_density = j.value("ladder_density", c.ladder_density);
    c.stride_factor = j.value("stride_factor", c.stride_factor);
    c.stride_factor_1d = j.value("stride_factor_1d", c.stride_factor_1d);
    c.seed = j.value("seed", c.seed);
    if (j.contains("samples")) {
      const json& s = j["samples"];
      c.pointwise_samples = s.value("pointwise", c.pointwise_samples);
      c.near_best_pairs = s.value("near_best_pairs", c.near_best_pairs);
      c.approx_centers = s.value("approx_centers", c.approx_centers);
    }
    c.reproduction_max_k = j.value("reproduction_max_k", c.reproduction_max_k);
    if (j.contains("checks")) {
      for (const auto& g : j["checks"]) {
        const std::string name = g.get<std::string>();
        if (name == "all") {
          c.groups.clear();
          break;
        }
        const auto& known = verify_groups();
        if (std::find(known.begin(), known.end(), name) == known.end())
          throw Error("unknown check group '" + name + "'");
        c.groups.insert(name);
      }
    }
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      auto get = [&](const char* key, double& dst) {
        if (t.contains(key)) dst = number_from(t[key]);
      };
      get("reproduction", c.tol.reproduction);
      get("near_best", c.tol.near_best);
      get("near_best_l2", c.tol.near_best_l2);
      get("partition_sum", c.tol.partition_sum);
      get("hlw", c.tol.hlw);
      get("restriction", c.tol.restriction);
      get("drift", c.tol.drift);
      get("skip_fraction", c.tol.skip_fraction);
      get("ladder_density", c.tol.ladder_density);
      get("q64", c.tol.q64);
      get("ms", c.tol.ms);
    }
    c.output = j.value("output", c.output);
    if (j.contains("format")) c.format = report_format_from_string(j["format"].get<std::string>());
    c.fault = j.value("fault", c.fault);
    if (!c.fault.empty() && c.fault != "skip_normalization") throw Error("unknown fault '" + c.fault + "'");
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(std::string("verify config: ") + e.what());
  }
  if (c.ladder_density <= 0.0) throw Error("verify config: ladder_density must be positive");
  if (c.k_values.empty()) throw Error("verify config: params.k is empty");
  for (int k : c.k_values)
    if (k < 1 || k > 4) throw Error("verify config: k must lie in 1..4");
  return c;
}

VerifyConfig load_verify_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_verify_config(ss.str());
}

namespace {

using clk = std::chrono::steady_clock;

constexpr double kTiny = 1e-9;

double seconds_since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

std::string num(double x) {
  if (std::isinf(x)) return "inf";
  std::ostringstream os;
  os << x;
  return os.str();
}

ordered_json jnum(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

/// Running max of lhs / rhs over samples. A sample with lhs above its noise floor and rhs
/// below its own is a violation (infinite ratio).
struct Ratio {
  double value = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  std::string worst;

  void bump(double r, const std::string& where) {
    if (r > value) {
      value = r;
      worst = where;
    }
  }
  void add(double lhs, double rhs, double tiny_lhs, double tiny_rhs, const std::string& where = {}) {
    ++samples;
    if (!(lhs > tiny_lhs)) return;
    if (!(rhs > tiny_rhs)) {
      ++violations;
      if (worst.empty() || std::isfinite(value)) worst = where;
      value = kInf;
      return;
    }
    bump(lhs / rhs, where);
  }
  void add(double lhs, double rhs, double tiny, const std::string& where = {}) { add(lhs, rhs, tiny, tiny, where); }
  /// max(a / b, b / a); both vanishing counts as 1.
  void add_two_sided(double a, double b, double tiny, const std::string& where = {}) {
    ++samples;
    const bool za = !(a > tiny), zb = !(b > tiny);
    if (za && zb) {
      bump(1.0, where);
      return;
    }
    if (za || zb) {
      ++violations;
      worst = where;
      value = kInf;
      return;
    }
    bump(std::max(a / b, b / a), where);
  }
  void merge(const Ratio& o) {
    if (o.value > value || (std::isinf(o.value) && !std::isinf(value))) {
      value = o.value;
      worst = o.worst;
    }
    samples += o.samples;
    violations += o.violations;
    skipped += o.skipped;
  }
  bool finite() const { return violations == 0 && std::isfinite(value); }
  double skip_fraction() const {
    const std::size_t total = samples + skipped;
    return total == 0 ? 0.0 : static_cast<double>(skipped) / static_cast<double>(total);
  }
  ordered_json json_value() const {
    ordered_json j;
    j["constant"] = jnum(value);
    j["samples"] = samples;
    j["violations"] = violations;
    j["skipped"] = skipped;
    if (!worst.empty()) j["worst"] = worst;
    return j;
  }
};

CheckResult result(std::string name, std::string ref, bool pass, double constant, std::size_t samples,
                   double tolerance, const ordered_json& details) {
  CheckResult r;
  r.name = std::move(name);
  r.paper_ref = std::move(ref);
  r.status = pass ? Status::pass : Status::fail;
  r.measured_constant = constant;
  r.samples = samples;
  r.tolerance = tolerance;
  r.details = details.dump();
  return r;
}

namespace ref {
constexpr const char* entry = "corpus entry construction";
constexpr const char* reproduction = "extension reproduces polynomials of degree < k near S";
constexpr const char* whitney = "Whitney cubes: covering, distance window, neighbour ratio, bounded overlap";
constexpr const char* partition = "partition of unity subordinate to the Whitney cover";
constexpr const char* quasicube = "quasi-cubes H_Q: inclusion in 10Q cap S, measure ratio, bounded overlap";
constexpr const char* near_best = "L2 projector onto polynomials is near-best in every L_u";
constexpr const char* approx = "local approximation of the extension on cubes centered in S";
constexpr const char* lu_bound = "L_u norm of the extension on K bounded by the L_u norm of f on 25K cap S";
constexpr const char* pointwise = "pointwise local approximation of the extension at every x and t";
constexpr const char* maximal = "sharp maximal function of the extension bounded by maximal functions on S";
constexpr const char* sharp_norm = "L_p norm of the truncated sharp maximal function of the extension";
constexpr const char* hlw = "Hardy-Littlewood-Wiener maximal inequality";
constexpr const char* sandwich = "packing modulus vs integral of local approximations";
constexpr const char* qmon = "quasi-monotonicity of the packing modulus";
constexpr const char* eqm = "modulus of continuity coincides with the packing modulus for u = p";
constexpr const char* difm = "packing modulus in L_p bounded by the integral of L_u packing moduli";
constexpr const char* kps = "local approximation of the extension bounded by intrinsic packing data";
constexpr const char* ms = "modulus of continuity of the extension via the u = p local approximation bound";
constexpr const char* tail = "packing modulus at scales comparable to delta bounded by the L_p norm";
constexpr const char* split = "doubled packing splits into boundedly many packings";
constexpr const char* equivalence = "trace norm equivalence: intrinsic functional on S vs extension in the space";
constexpr const char* boundary = "Besov smoothness boundary of a cusp";
constexpr const char* density = "quadrature: doubling the radius ladder density";
constexpr const char* q64 = "quadrature: q = 64 vs q = inf generalized sharp functions";
constexpr const char* drift = "constant stability under grid refinement";
}  // namespace ref

struct Entry {
  const CorpusSet* set = nullptr;
  int level = 0;
  std::string tag;
  Grid grid;
  RegularSet s;
  std::vector<FunctionSpec> specs;
  std::vector<GridFunction> fns;
  std::vector<double> dist;
  RadiusLadder ladder;
  std::vector<std::size_t> samples;        // stratified sample cells
  std::vector<std::size_t> sample_radius;  // ladder index per sample (cube inside the box)
  std::vector<std::size_t> centers;        // S cells for cubes centered in S
  std::vector<int> approx_m;               // cube half-widths in cells, shared by all centers
  std::map<int, std::unique_ptr<ExtensionOperator>> ops;
};

/// Corpus-wide ratio per key and refinement level.
using LevelRatios = std::map<int, Ratio>;

struct EntryAccum {
  std::map<std::string, Ratio> approx, lu;  // key "k<k>/u<u>"
  Ratio pointwise, maximal, sharp_norm;
  std::map<std::string, Ratio> hlw;  // key "u<u>/p<p>"
  Ratio sandwich, qmon, eqm, difm, kps, ms, ms_consistency, tail;
  int split_max = 0;
  std::size_t split_samples = 0;
  std::map<std::string, Ratio> equivalence, restriction, modulus_equivalence;  // per space
  double density_gap = 0.0;
  double density_gap_finite_q = 0.0;
  std::size_t density_samples = 0;
  std::string density_worst;
  double q64_gap = 0.0;
  std::size_t q64_samples = 0;
};

struct NormRow {
  std::string label;
  Space space;
  double intrinsic = 0.0;
  double whole = 0.0;
  double whole_modulus = -1.0;
  bool sup = true;  // q = inf
};

bool inside_box(const Grid& g, std::size_t cell, int m) {
  const Index idx = g.multi(cell);
  for (int i = 0; i < g.n(); ++i)
    if (idx[i] - m < 0 || idx[i] + m >= g.dims()[i]) return false;
  return true;
}

int box_margin(const Grid& g, std::size_t cell) {
  const Index idx = g.multi(cell);
  int m = std::numeric_limits<int>::max();
  for (int i = 0; i < g.n(); ++i) m = std::min({m, idx[i], g.dims()[i] - 1 - idx[i]});
  return m;
}

double lp_cells(const std::vector<double>& v, const std::vector<std::size_t>* cells, double p, double w) {
  const std::size_t count = cells ? cells->size() : v.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = std::abs(v[cells ? (*cells)[i] : i]);
    acc = std::isinf(p) ? std::max(acc, x) : acc + std::pow(x, p);
  }
  return std::isinf(p) ? acc : std::pow(acc * w, 1.0 / p);
}

/// Fisher-Yates prefix with raw mt19937 output, so the selection is platform independent.
template <class T>
void sample_prefix(std::vector<T>& v, std::size_t count, std::mt19937& rng) {
  count = std::min(count, v.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (v.size() - i));
    std::swap(v[i], v[j]);
  }
  v.resize(count);
}

class Runner {
 public:
  explicit Runner(const VerifyConfig& cfg) : cfg_(cfg) {}

  VerifyRun run() {
    const auto t0 = clk::now();
    if (cfg_.threads) set_thread_count(cfg_.threads);
    for (const auto& set : cfg_.sets)
      for (std::size_t level = 0; level < set.resolutions.size(); ++level) run_entry(set, static_cast<int>(level));
    emit_corpus_wide();
    emit_drift();
    VerifyRun out;
    out.report = std::move(report_);
    out.timings = std::move(timings_);
    out.seconds = seconds_since(t0);
    out.timings.push_back({"total", out.seconds});
    return out;
  }

 private:
  bool on(const std::string& group) const { return cfg_.groups.empty() || cfg_.groups.count(group) > 0; }

  void add(CheckResult r) { report_.push_back(std::move(r)); }

  template <class Body>
  void guarded(const std::string& name, const char* paper_ref, Body&& body) {
    try {
      body();
    } catch (const std::exception& ex) {
      ordered_json d;
      d["error"] = ex.what();
      add(result(name, paper_ref, false, kInf, 0, 0.0, d));
    }
  }

  void record_drift(const std::string& key, int level, double value, const char* paper_ref) {
    drift_[key][level] = value;
    drift_ref_[key] = paper_ref;
  }

  const ExtensionOperator& op(Entry& e, int k) {
    auto it = e.ops.find(k);
    if (it == e.ops.end()) {
      ExtensionOptions o;
      it = e.ops.emplace(k, std::make_unique<ExtensionOperator>(e.s, k, o)).first;
    }
    return *it->second;
  }

  int structure_max_k() const {
    int kmax = cfg_.reproduction_max_k;
    for (int k : cfg_.k_values) kmax = std::max(kmax, k);
    return std::max(kmax, 1);
  }

  // ---------------------------------------------------------------- entry setup

  void run_entry(const CorpusSet& set, int level) {
    const auto t0 = clk::now();
    Entry e;
    e.set = &set;
    e.level = level;
    const int cells = set.resolutions[level];
    e.tag = set.name + "/" + std::to_string(cells);
    bool ok = false;
    guarded("entry/" + e.tag, ref::entry, [&] {
      e.grid = corpus_grid(set, cells);
      e.s = generate_set(set.spec, e.grid);
      if (e.s.cells.empty()) throw Error("set rasterises to no cells");
      e.specs = cfg_.functions.empty() ? default_functions(e.s, cfg_.max_degree, cfg_.seed, {0.3, 0.3, 0.3})
                                       : cfg_.functions;
      for (const auto& spec : e.specs) {
        e.fns.push_back(make_function(spec, e.grid));
        e.fns.back().require_finite();
      }
      e.dist = distance_field(e.s.cells);
      e.ladder = RadiusLadder(e.grid.h(), e.grid.r_max(), cfg_.ladder_density);
      choose_samples(e);
      ok = true;
    });
    if (!ok) return;

    if (on("whitney") || on("partition") || on("quasicube")) structure_checks(e);
    if (on("reproduction")) reproduction_check(e);
    if (on("near_best")) near_best_check(e);

    EntryAccum acc;
    const bool need_fields = on("pointwise") || on("maximal") || on("moduli") || on("equivalence") ||
                             on("quadrature");
    for (int k : cfg_.k_values)
      for (std::size_t i = 0; i < e.fns.size(); ++i) {
        const std::string where = "k" + std::to_string(k) + "/" + e.specs[i].name;
        guarded("error/" + e.tag + "/" + where, ref::entry, [&] { function_checks(e, k, i, need_fields, acc); });
      }
    if (on("maximal"))
      for (std::size_t i = 0; i < e.fns.size(); ++i)
        guarded("error/" + e.tag + "/hlw/" + e.specs[i].name, ref::hlw, [&] { hlw_sample(e, i, acc); });
    emit_entry(e, acc);
    timings_.push_back({"entry/" + e.tag, seconds_since(t0)});
  }

  void choose_samples(Entry& e) {
    const Grid& g = e.grid;
    std::mt19937 rng(cfg_.seed * 7919u + static_cast<unsigned>(e.level) * 104729u +
                     static_cast<unsigned>(std::hash<std::string>{}(e.set->name) & 0xffffu));
    // Dyadic distance shells: 0 = S, j >= 1 holds 2^{j-1} h <= dist < 2^j h.
    std::map<int, std::vector<std::size_t>> shells;
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (box_margin(g, c) < 1) continue;
      const double d = e.dist[c] / g.h();
      const int shell = e.s.cells.contains(c) ? 0 : 1 + static_cast<int>(std::floor(std::log2(std::max(d, 1.0))));
      shells[shell].push_back(c);
    }
    std::vector<std::vector<std::size_t>*> order;
    for (auto& [_, v] : shells) order.push_back(&v);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->size() < b->size(); });
    std::size_t remaining = cfg_.pointwise_samples;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t quota = remaining / (order.size() - i);
      std::vector<std::size_t> pick = *order[i];
      sample_prefix(pick, quota, rng);
      remaining -= pick.size();
      e.samples.insert(e.samples.end(), pick.begin(), pick.end());
    }
    std::sort(e.samples.begin(), e.samples.end());
    for (std::size_t c : e.samples) {
      const int margin = box_margin(g, c);
      std::size_t count = 0;
      while (count < e.ladder.size() && footprint_halfwidth(e.ladder[count], g.h()) <= margin) ++count;
      e.sample_radius.push_back(count == 0 ? 0 : rng() % count);
    }
    // Centers and radii are drawn at the coarsest level and reused physically on refinement.
    auto& plan = approx_plan_[e.set->name];
    if (e.level == 0 || plan.first.empty()) {
      plan = {};
      std::vector<std::size_t> s_cells = e.s.cells.indices();
      sample_prefix(s_cells, cfg_.approx_centers, rng);
      std::sort(s_cells.begin(), s_cells.end());
      for (std::size_t c : s_cells) plan.first.push_back(g.center(c));
      int last_m = -1;
      for (std::size_t j = 0; j < e.ladder.size(); ++j) {
        const int m = footprint_halfwidth(e.ladder[j], g.h());
        if (m < 1 || m == last_m || effective_radius(e.ladder[j], g.h()) > 0.25 * e.s.delta) continue;
        last_m = m;
        plan.second.push_back(effective_radius(e.ladder[j], g.h()));
      }
      if (plan.second.size() > 12) {
        std::vector<double> thin;
        for (std::size_t i = 0; i < 12; ++i) thin.push_back(plan.second[i * (plan.second.size() - 1) / 11]);
        thin.erase(std::unique(thin.begin(), thin.end()), thin.end());
        plan.second = thin;
      }
    }
    for (const Point& p : plan.first) {
      std::size_t c = g.flat(g.locate(p));
      if (!e.s.cells.contains(c)) c = e.s.nearest(p).cell;
      e.centers.push_back(c);
    }
    for (double r : plan.second) {
      const int m = std::max(1, static_cast<int>(std::lround(r / g.h() - 0.5)));
      if (e.approx_m.empty() || e.approx_m.back() != m) e.approx_m.push_back(m);
    }
  }

  // ---------------------------------------------------------------- structure

  void structure_checks(Entry& e) {
    const int n = e.grid.n();
    for (int k = 1; k <= structure_max_k(); ++k) {
      const std::string suffix = e.tag + "/k" + std::to_string(k);
      const ExtensionOperator* o = nullptr;
      guarded("whitney/" + suffix, ref::whitney, [&] { o = &op(e, k); });
      if (!o) continue;
      const auto& w = o->whitney();
      if (on("whitney"))
        guarded("whitney/" + suffix, ref::whitney, [&] {
          const WhitneyCheck c = check_whitney(w, e.s.cells, 2000, cfg_.seed);
          const int mult_bound = 1 << n;
          const double neighbor_bound = std::pow(41.0, n);
          const bool pass = c.uncovered_cells == 0 && c.window_violations == 0 && c.ratio_violations == 0 &&
                            c.overlap_violations == 0 && c.max_multiplicity <= mult_bound &&
                            c.max_neighbors <= neighbor_bound;
          ordered_json d;
          d["cubes"] = c.cubes;
          d["flagged"] = c.flagged;
          d["uncovered_cells"] = c.uncovered_cells;
          d["window_violations"] = c.window_violations;
          d["ratio_violations"] = c.ratio_violations;
          d["overlap_violations"] = c.overlap_violations;
          d["max_multiplicity"] = c.max_multiplicity;
          d["multiplicity_bound"] = mult_bound;
          d["max_neighbors"] = c.max_neighbors;
          d["neighbor_bound"] = neighbor_bound;
          d["dist_ratio"] = {jnum(c.min_dist_ratio), jnum(c.max_dist_ratio)};
          add(result("whitney/" + suffix, ref::whitney, pass, c.max_neighbors, c.cubes, 0.0, d));
        });
      if (on("partition"))
        guarded("partition/" + suffix, ref::partition, [&] {
          const bool fault = cfg_.fault == "skip_normalization";
          PartitionOfUnity raw;
          if (fault) raw = partition_of_unity(w, e.s.cells, o->partition().m, false);
          const PartitionOfUnity& pu = fault ? raw : o->partition();
          const PartitionCheck c = check_partition(w, pu, e.s.cells, 200, cfg_.seed);
          const double tol = cfg_.tol.partition_sum;
          const bool pass = c.max_sum_error <= tol && c.support_violations == 0 && c.min_phi >= -tol &&
                            c.max_phi <= 1.0 + tol;
          ordered_json d;
          d["points"] = c.points;
          d["max_sum_error"] = c.max_sum_error;
          d["min_phi"] = c.min_phi;
          d["max_phi"] = c.max_phi;
          d["support_violations"] = c.support_violations;
          d["grad_constant"] = jnum(c.grad_constant);
          d["hessian_constant"] = jnum(c.hessian_constant);
          d["normalized"] = pu.normalized;
          add(result("partition/" + suffix, ref::partition, pass, c.max_sum_error, c.points, tol, d));
        });
      if (on("quasicube"))
        guarded("quasicube/" + suffix, ref::quasicube, [&] {
          const QuasiCubeFamily& h = o->quasicubes();
          ordered_json d;
          d["epsilon"] = h.epsilon;
          d["gamma1"] = jnum(h.gamma1);
          d["gamma2"] = h.gamma2;
          d["cubes_small"] = h.cubes_small;
          d["cubes_with_h"] = h.cubes_with_h;
          d["empty_small"] = h.empty_small;
          d["inclusion_violations"] = h.inclusion_violations;
          d["mechanism_violations"] = h.mechanism_violations;
          add(result("quasicube/" + suffix, ref::quasicube, h.valid(), h.gamma1, h.cubes_small, 0.0, d));
          const std::string key = "quasicube/" + e.set->name + "/k" + std::to_string(k);
          record_drift(key + "/gamma1", e.level, h.gamma1, ref::quasicube);
          record_drift(key + "/gamma2", e.level, h.gamma2, ref::quasicube);
        });
    }
  }

  void reproduction_check(Entry& e) {
    guarded("reproduction/" + e.tag, ref::reproduction, [&] {
      const auto t0 = clk::now();
      const Grid& g = e.grid;
      const int n = g.n();
      std::vector<std::size_t> zone;
      for (std::size_t c = 0; c < g.size(); ++c)
        if (e.dist[c] <= 0.5 * e.s.delta) zone.push_back(c);
      std::mt19937 rng(cfg_.seed);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      double worst = 0.0;
      std::string worst_at;
      std::size_t polys = 0;
      for (int k = 1; k <= cfg_.reproduction_max_k; ++k) {
        const ExtensionOperator& o = op(e, k);
        const auto betas = multi_indices(n, k);
        std::vector<double> mix(betas.size());
        for (double& m : mix) m = coef(rng);
        for (std::size_t b = 0; b <= betas.size(); ++b) {
          GridFunction q(g, 0.0);
          for (std::size_t c = 0; c < g.size(); ++c) {
            const Point x = g.center(c);
            auto mono = [&](const Index& beta) {
              double v = 1.0;
              for (int i = 0; i < n; ++i) v *= std::pow(x[i], beta[i]);
              return v;
            };
            if (b < betas.size()) {
              q[c] = mono(betas[b]);
            } else {
              for (std::size_t a = 0; a < betas.size(); ++a) q[c] += mix[a] * mono(betas[a]);
            }
          }
          const GridFunction eq = extend(q, o).values;
          double err = 0.0, scale = 0.0;
          for (std::size_t c : zone) {
            err = std::max(err, std::abs(eq[c] - q[c]));
            scale = std::max(scale, std::abs(q[c]));
          }
          const double rel = scale > 0.0 ? err / scale : err;
          ++polys;
          if (rel > worst || worst_at.empty()) {
            worst = std::max(worst, rel);
            worst_at = "k" + std::to_string(k) + "/" + (b < betas.size() ? "monomial" + std::to_string(b) : "mix");
          }
        }
      }
      const double secs = seconds_since(t0);
      timings_.push_back({"reproduction/" + e.tag, secs});
      ordered_json d;
      d["zone_cells"] = zone.size();
      d["max_k"] = cfg_.reproduction_max_k;
      d["worst"] = worst_at;
      add(result("reproduction/" + e.tag, ref::reproduction, worst <= cfg_.tol.reproduction, worst, polys,
                 cfg_.tol.reproduction, d));
    });
  }

  void near_best_check(Entry& e) {
    guarded("near_best/" + e.tag, ref::near_best, [&] {
      const Grid& g = e.grid;
      const int n = g.n();
      const double w = g.cell_volume();
      struct Candidate {
        int k;
        std::size_t q;
      };
      std::vector<Candidate> cand;
      for (int k = 1; k <= std::min(3, structure_max_k()); ++k) {
        const auto& h = op(e, k).quasicubes();
        for (std::size_t q = 0; q < h.cells.size(); ++q)
          if (h.small[q] && !h.cells[q].empty() && h.cells[q].size() <= 1000) cand.push_back({k, q});
      }
      if (cand.empty()) throw Error("no quasi-cube with 1..1000 cells");
      std::mt19937 rng(cfg_.seed + 17u);
      std::uniform_real_distribution<double> noise(-1.0, 1.0);
      double worst_u = 0.0, worst_l2 = 0.0;
      std::string worst_at;
      for (std::size_t pair = 0; pair < cfg_.near_best_pairs; ++pair) {
        const Candidate c = cand[rng() % cand.size()];
        const auto& cells = op(e, c.k).quasicubes().cells[c.q];
        GridFunction f(g, 0.0);
        std::string label;
        if (pair % 2 == 0 && !e.fns.empty()) {
          const std::size_t fi = rng() % e.fns.size();
          f = e.fns[fi];
          label = e.specs[fi].name;
        } else {
          for (auto cell : cells) f[cell] = noise(rng);
          label = "noise";
        }
        label += "/k" + std::to_string(c.k) + "/cells" + std::to_string(cells.size());
        double scale = 0.0;
        for (auto cell : cells) scale = std::max(scale, std::abs(f[cell]));
        const ProjectorResult pr = projector(f, cells, c.k);
        double l1 = 0.0, l2 = 0.0, linf = 0.0;
        for (auto cell : cells) {
          const double r = std::abs(f[cell] - pr.poly(g.center(cell)));
          l1 += r * w;
          l2 += r * r * w;
          linf = std::max(linf, r);
        }
        l2 = std::sqrt(l2);
        const double e1 = local_best_approx(f, cells, c.k, 1.0, ApproxMode::exact).value;
        const double einf = local_best_approx(f, cells, c.k, kInf, ApproxMode::exact).value;
        const double mass = static_cast<double>(cells.size()) * w;
        auto ratio = [&](double fast, double exact, double tiny) {
          if (exact > tiny) return fast / exact;
          return fast <= 10.0 * tiny ? 1.0 : kInf;
        };
        const double r1 = ratio(l1, e1, 1e-12 * (scale + 1e-300) * mass);
        const double rinf = ratio(linf, einf, 1e-12 * (scale + 1e-300));

        // Independent dense least squares in the same centered monomial basis.
        const auto betas = multi_indices(n, c.k);
        const int dim = static_cast<int>(betas.size());
        Point lo{kInf, kInf, kInf}, hi{-kInf, -kInf, -kInf};
        for (auto cell : cells) {
          const Point x = g.center(cell);
          for (int i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
          }
        }
        Point center{};
        double half = 0.0;
        for (int i = 0; i < n; ++i) {
          center[i] = 0.5 * (lo[i] + hi[i]);
          half = std::max(half, 0.5 * (hi[i] - lo[i]));
        }
        if (half <= 0.0) half = g.h();
        Eigen::MatrixXd v(static_cast<Eigen::Index>(cells.size()), dim);
        Eigen::VectorXd b(static_cast<Eigen::Index>(cells.size()));
        std::vector<double> row(dim);
        for (std::size_t r = 0; r < cells.size(); ++r) {
          basis_values(betas, n, c.k, center, half, g.center(cells[r]), row.data());
          for (int a = 0; a < dim; ++a) v(static_cast<Eigen::Index>(r), a) = row[a];
          b(static_cast<Eigen::Index>(r)) = f[cells[r]];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
        qr.setThreshold(1e-10);
        const Eigen::VectorXd x = qr.solve(b);
        const double l2_dense = std::sqrt((b - v * x).squaredNorm() * w);
        const double tiny2 = 1e-12 * (scale + 1e-300) * std::sqrt(mass);
        const double r2 = l2_dense > tiny2 ? l2 / l2_dense : (l2 <= 10.0 * tiny2 ? 1.0 : kInf);

        const double ru = std::max(r1, rinf);
        if (ru > worst_u || worst_at.empty()) worst_at = label;
        worst_u = std::max(worst_u, ru);
        worst_l2 = std::max(worst_l2, r2);
      }
      const bool pass = worst_u <= cfg_.tol.near_best && worst_l2 <= 1.0 + cfg_.tol.near_best_l2;
      ordered_json d;
      d["max_ratio_l1_linf"] = jnum(worst_u);
      d["max_ratio_l2"] = jnum(worst_l2);
      d["candidates"] = cand.size();
      d["worst"] = worst_at;
      add(result("near_best/" + e.tag, ref::near_best, pass, worst_u, cfg_.near_best_pairs, cfg_.tol.near_best, d));
    });
  }

  // ---------------------------------------------------------------- per function

  static double f_scale(const Entry& e, const GridFunction& f) {
    double m = 0.0;
    for (std::size_t c = 0; c < f.grid().size(); ++c)
      if (e.s.cells.contains(c)) m = std::max(m, std::abs(f[c]));
    return std::max(m, 1e-300);
  }

  FieldOptions field_options(const Grid& g) const {
    FieldOptions o;
    o.stride_factor = g.n() == 1 ? cfg_.stride_factor_1d : cfg_.stride_factor;
    for (double u : cfg_.u_values)
      if (u > 0.0 && std::isfinite(u) && u != 1.0 && u != 2.0) o.extra_u = u;
    return o;
  }

  void function_checks(Entry& e, int k, std::size_t fi, bool need_fields, EntryAccum& acc) {
    const GridFunction& f = e.fns[fi];
    const std::string label = "k" + std::to_string(k) + "/" + e.specs[fi].name;
    const double tiny = kTiny * f_scale(e, f);
    const ExtensionOperator& o = op(e, k);
    const GridFunction ef = extend(f, o).values;
    if (on("extension")) approx_samples(e, k, f, ef, tiny, label, acc);
    if (!need_fields) return;
    const FieldOptions fo = field_options(e.grid);
    const LocalApproxField fs(f, &e.s.cells, k, e.ladder, fo);
    const LocalApproxField fw(ef, nullptr, k, e.ladder, fo);
    std::map<double, std::vector<double>> omega;
    for (double p : {2.0, kInf}) omega[p] = modulus_continuity_curve(ef, k, p, e.ladder);
    for (double p : cfg_.p_values)
      if (!omega.count(p)) omega[p] = modulus_continuity_curve(ef, k, p, e.ladder);
    if (on("pointwise")) pointwise_samples(e, k, f, ef, tiny, label, acc);
    if (on("maximal")) maximal_samples(e, k, f, fs, fw, tiny, label, acc);
    if (on("moduli")) moduli_samples(e, k, f, fs, fw, omega, tiny, label, acc);
    std::vector<NormRow> rows;
    if (on("equivalence") || (on("quadrature") && e.level == 0)) {
      rows = norm_rows(k, f, ef, fs, fw, omega);
      for (const auto& r : rows) {
        const std::string sp = to_string(r.space);
        const std::string where = label + "/" + r.label;
        acc.equivalence[sp].add_two_sided(r.whole, r.intrinsic, tiny, where);
        acc.restriction[sp].add(r.intrinsic, r.whole, tiny, where);
        if (r.whole_modulus >= 0.0) acc.modulus_equivalence[sp].add_two_sided(r.whole_modulus, r.intrinsic, tiny, where);
      }
      if (e.specs[fi].kind == FunctionKind::cusp && e.specs[fi].sigma == 0.5 && k == 1) boundary_sample(e, f, fs);
    }
    if (on("quadrature") && e.level == 0) quadrature_samples(e, k, f, ef, fs, rows, tiny, label, acc);
  }

  void approx_samples(Entry& e, int k, const GridFunction& f, const GridFunction& ef, double tiny,
                      const std::string& label, EntryAccum& acc) {
    const Grid& g = e.grid;
    const int n = g.n();
    const double h = g.h();
    FitWorkspace ws;
    for (std::size_t c : e.centers)
      for (int m : e.approx_m) {
        const double r = (m + 0.5) * h;
        const Cube kq{g.center(c), r};
        const std::string where = label + "/cell" + std::to_string(c) + "/r" + num(r);
        if (!inside_box(g, c, m)) {
          for (double u : {1.0, 2.0, kInf}) {
            const std::string key = "k" + std::to_string(k) + "/u" + num(u);
            ++acc.approx[key].skipped;
            ++acc.lu[key].skipped;
          }
          continue;
        }
        const LocalErrors lhs = cube_fit_errors(ef, nullptr, kq, k, 0.0, ws);
        const LocalErrors rhs = cube_fit_errors(f, &e.s.cells, kq.scale(25.0), k, 0.0, ws);
        for (double u : {1.0, 2.0, kInf}) {
          const std::string key = "k" + std::to_string(k) + "/u" + num(u);
          const double vk = std::isinf(u) ? 1.0 : std::pow(std::pow(2.0 * r, n), 1.0 / u);
          const double v25 = std::isinf(u) ? 1.0 : std::pow(std::pow(50.0 * r, n), 1.0 / u);
          acc.approx[key].add(lhs.norm(u) / vk, rhs.norm(u) / v25, tiny, where);
          const NormCheck nc = extend_norm_check(f, ef, e.s, kq, u);
          if (nc.skipped) {
            ++acc.lu[key].skipped;
          } else {
            acc.lu[key].add(nc.lhs, nc.rhs, tiny * vk, tiny * v25, where);
          }
        }
      }
  }

  void pointwise_samples(Entry& e, int k, const GridFunction& f, const GridFunction& ef, double tiny,
                         const std::string& label, EntryAccum& acc) {
    const Grid& g = e.grid;
    const int n = g.n();
    const double h = g.h();
    FitWorkspace ws;
    std::map<int, LocalErrors> whole;  // fits over all of S, keyed by order
    const Point box_lo = g.origin();
    for (std::size_t i = 0; i < e.samples.size(); ++i) {
      const std::size_t c = e.samples[i];
      const double t = e.ladder[e.sample_radius[i]];
      if (footprint_halfwidth(t, h) > box_margin(g, c)) {
        ++acc.pointwise.skipped;
        continue;
      }
      const double r = effective_radius(t, h);
      const Point x = g.center(c);
      const LocalErrors lhs = cube_fit_errors(ef, nullptr, {x, r}, k, 0.0, ws);
      const NearestResult a = e.s.nearest(x);
      const double d = e.dist[c];
      const double rr = 50.0 * std::max(80.0 * r, d);
      const int kappa = rr <= e.s.delta ? k : 0;
      const Cube kx{a.point, rr};
      bool covers = true;
      for (int ax = 0; ax < n; ++ax)
        covers = covers && kx.center[ax] - rr <= box_lo[ax] && kx.center[ax] + rr >= box_lo[ax] + g.extent(ax);
      LocalErrors rhs;
      if (covers) {
        auto it = whole.find(kappa);
        if (it == whole.end()) {
          const Cube all{kx.center, rr};
          it = whole.emplace(kappa, cube_fit_errors(f, &e.s.cells, all, kappa, 0.0, ws)).first;
        }
        rhs = it->second;
      } else {
        rhs = cube_fit_errors(f, &e.s.cells, kx, kappa, 0.0, ws);
      }
      const double factor = std::pow(r, k) / (std::pow(r, k) + std::pow(d, k));
      for (double u : {1.0, 2.0, kInf}) {
        const double vq = std::isinf(u) ? 1.0 : std::pow(std::pow(2.0 * r, n), 1.0 / u);
        const double vk = std::isinf(u) ? 1.0 : std::pow(std::pow(2.0 * rr, n), 1.0 / u);
        acc.pointwise.add(lhs.norm(u) / vq, factor * rhs.norm(u) / vk, tiny,
                          label + "/cell" + std::to_string(c) + "/t" + num(t) + "/u" + num(u));
      }
    }
  }

  std::vector<SpaceParams> sharp_params(int k) const {
    if (k == 1) return {{1.0, 1, 2.0, kInf, 1.0}, {0.7, 1, 2.0, 2.0, 1.0}, {0.7, 1, 2.0, kInf, 2.0}};
    return {{2.0, 2, 2.0, kInf, 1.0}, {1.5, 2, 2.0, 2.0, 1.0}, {0.3, 2, 2.0, 1.0, 2.0}};
  }

  void maximal_samples(Entry& e, int k, const GridFunction& f, const LocalApproxField& fs,
                       const LocalApproxField& fw, double tiny, const std::string& label, EntryAccum& acc) {
    const Grid& g = e.grid;
    const GridFunction fz = zero_extend(f, e.s.cells);
    std::map<double, GridFunction> mu;
    for (const SpaceParams& v : sharp_params(k)) {
      const GridFunction lhs = generalized_sharp(fw, v, kInf);
      const GridFunction inner = generalized_sharp(fs, v, kInf);
      const GridFunction m1 = hl_maximal(inner, 1.0, e.ladder);
      if (!mu.count(v.u)) mu.emplace(v.u, hl_maximal(fz, v.u, e.ladder));
      const GridFunction& m2 = mu.at(v.u);
      const std::string vl = label + "/s" + num(v.s) + "q" + num(v.q) + "u" + num(v.u);
      for (std::size_t c : e.samples) acc.maximal.add(lhs[c], m1[c] + m2[c], tiny, vl + "/cell" + std::to_string(c));
    }
    // Truncated (cap 1) sharp functions in L_2.
    const SpaceParams v = k == 1 ? SpaceParams{0.7, 1, 2.0, 2.0, 1.0} : SpaceParams{1.5, 2, 2.0, 2.0, 1.0};
    const double w = g.cell_volume();
    const GridFunction lhs = generalized_sharp(fw, v, 1.0);
    const GridFunction rhs = generalized_sharp(fs, v, 1.0);
    const auto& sc = fs.domain_cells();
    const double l = lp_cells(lhs.values(), nullptr, v.p, w);
    const double r = lp_cells(rhs.values(), &sc, v.p, w) + lp_cells(f.values(), &sc, v.p, w);
    acc.sharp_norm.add(l, r, tiny, label);
  }

  void hlw_sample(Entry& e, std::size_t fi, EntryAccum& acc) {
    const GridFunction g = zero_extend(e.fns[fi], e.s.cells);
    const double w = e.grid.cell_volume();
    const double tiny = kTiny * f_scale(e, e.fns[fi]);
    for (auto [u, p] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {1.0, kInf}, {2.0, 4.0}}) {
      const GridFunction m = hl_maximal(g, u, e.ladder);
      const std::string key = "u" + num(u) + "/p" + num(p);
      acc.hlw[key].add(lp_cells(m.values(), nullptr, p, w), lp_cells(g.values(), nullptr, p, w), tiny,
                       e.specs[fi].name);
    }
  }

  void moduli_samples(Entry& e, int k, const GridFunction& f, const LocalApproxField& fs,
                      const LocalApproxField& fw, const std::map<double, std::vector<double>>& omega, double tiny,
                      const std::string& label, EntryAccum& acc) {
    const Grid& g = e.grid;
    const double h = g.h();
    const RadiusLadder& L = e.ladder;
    const std::size_t J = L.size();
    const auto dens = static_cast<std::size_t>(std::lround(L.density()));
    std::size_t j4 = 0;
    while (j4 < J && L[j4] < 4.0 * h * (1.0 - 1e-9)) ++j4;
    auto packing_curve = [&](const LocalApproxField& field, double p, double u) {
      std::vector<double> c(J, 0.0);
      for (std::size_t j = j4; j < J; ++j) c[j] = kp_modulus(field, p, u, L[j], false).packing;
      return c;
    };
    const auto& sc = fs.domain_cells();
    const double w = g.cell_volume();

    // Intrinsic: sandwich, quasi-monotonicity, bounded tail, packing split.
    for (auto [u, p] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {2.0, 2.0}, {2.0, kInf}, {kInf, kInf}}) {
      const std::vector<double> om = packing_curve(fs, p, u);
      const std::vector<double>& in = fs.norm_curve(u, p);
      const std::string up = label + "/u" + num(u) + "p" + num(p);
      for (std::size_t j = j4; j < J; ++j) {
        const std::string at = up + "/t" + num(L[j]);
        if (L[j] >= 16.0 * h * (1.0 - 1e-9) && j >= 2 * dens) {
          acc.sandwich.add(in[j], om[j], tiny, at + "/upper");
          acc.sandwich.add(om[j - 2 * dens], in[j], tiny, at + "/lower");
        }
        if (j + dens < J) acc.qmon.add(om[j], om[j + dens], tiny, at);
      }
      const double fp = lp_cells(f.values(), &sc, p, w);
      const double band_lo = 2.0 * std::min(8.0 * e.s.delta, 0.5), band_hi = 16.0 * e.s.delta;
      for (std::size_t j = j4; j < J; ++j)
        if (L[j] >= band_lo * (1.0 - 1e-9) && L[j] <= band_hi) acc.tail.add(om[j], fp, tiny, up + "/t" + num(L[j]));
      if (u == 1.0 && p == 2.0) {
        const std::size_t js = std::min(J - 1, j4 + 2 * dens);
        const PackingResult pr = kp_modulus(fs, p, u, L[js], false);
        if (!pr.centers.empty()) {
          acc.split_max = std::max(acc.split_max, split_into_packings(g, pr.centers, footprint_halfwidth(L[js], h)));
          ++acc.split_samples;
        }
      }
    }

    // Whole box: EQM, DIFM, KPS, MS.
    int min_extent = g.dims()[0];
    for (int i = 1; i < g.n(); ++i) min_extent = std::min(min_extent, g.dims()[i]);
    const double eqm_cap = std::min(1.0, min_extent * h / (4.0 * k));
    const std::size_t j1 = L.count_upto(1.0);  // KPS uses t <= 1
    for (double p : {2.0, kInf}) {
      const std::vector<double> Wp = packing_curve(fw, p, p);
      const std::vector<double>& om = omega.at(p);
      const std::vector<double>& iw = fw.norm_curve(p, p);
      double c_eqm_int = 0.0;  // max omega / integral estimator over the same t
      double gamma = 0.0;      // max omega / KPS right-hand side
      double c_kpp = 0.0;      // KPS constant for u = p
      for (std::size_t j = j4; j < J && L[j] <= eqm_cap * (1.0 + 1e-9); ++j) {
        const std::string at = label + "/p" + num(p) + "/t" + num(L[j]);
        acc.eqm.add_two_sided(om[j], Wp[j], tiny, at);
      }
      const double u_difm = p == 2.0 ? 1.0 : 2.0;
      const std::vector<double> Wu = packing_curve(fw, p, u_difm);
      for (std::size_t j = j4; j < J; ++j) {
        if (j < j4 + 2) continue;
        const double rhs = log_trapezoid(L.values(), Wu, j4, j);
        acc.difm.add(Wp[j], rhs, tiny, label + "/u" + num(u_difm) + "p" + num(p) + "/t" + num(L[j]));
      }
      // KPS for every (u, p) with u <= p, and the u = p corollary for omega.
      for (double u : {1.0, 2.0, kInf}) {
        if (u > p) continue;
        const std::vector<double>& in = fs.norm_curve(u, p);
        const std::vector<double>& lhs = fw.norm_curve(u, p);
        const double fp = lp_cells(f.values(), &sc, p, w);
        for (std::size_t j = 0; j < j1; ++j) {
          const double r = effective_radius(L[j], h);
          double tail = 0.0;
          if (std::isinf(p)) {
            for (std::size_t i = j; i < j1; ++i)
              tail = std::max(tail, in[i] / std::pow(effective_radius(L[i], h), k));
          } else if (j + 1 < j1) {
            std::vector<double> gq(J, 0.0);
            for (std::size_t i = j; i < j1; ++i) gq[i] = std::pow(in[i] / std::pow(effective_radius(L[i], h), k), p);
            tail = std::pow(log_trapezoid(L.values(), gq, j, j1 - 1), 1.0 / p);
          }
          const double rhs = std::pow(r, k) * (tail + fp);
          const std::string at = label + "/u" + num(u) + "p" + num(p) + "/t" + num(L[j]);
          acc.kps.add(lhs[j], rhs, tiny, at);
          if (u == p && rhs > 0.0) {
            c_kpp = std::max(c_kpp, lhs[j] / rhs);
            if (L[j] >= h * (1.0 - 1e-9) && L[j] <= eqm_cap * (1.0 + 1e-9)) {
              acc.ms.add(om[j], rhs, tiny, at);
              gamma = std::max(gamma, om[j] / rhs);
              if (iw[j] > tiny) c_eqm_int = std::max(c_eqm_int, om[j] / iw[j]);
            }
          }
        }
      }
      const double bound = c_kpp * c_eqm_int;
      const double consistency = bound > 0.0 ? gamma / bound : (gamma > tiny ? kInf : 0.0);
      acc.ms_consistency.add(consistency, 1.0, 0.0, 0.0, label + "/p" + num(p));
    }
  }

  std::vector<NormRow> norm_rows(int k, const GridFunction& f, const GridFunction& ef, const LocalApproxField& fs,
                                 const LocalApproxField& fw, const std::map<double, std::vector<double>>& omega) {
    std::vector<NormRow> rows;
    for (double p : cfg_.p_values) {
      const SpaceParams v{static_cast<double>(k), k, p, kInf, 1.0};
      if (!admissibility_violation(v, Space::sobolev).empty()) continue;
      NormRow r{"W/p" + num(p), Space::sobolev};
      r.intrinsic = trace_norm(Space::sobolev, f, fs, v).value;
      r.whole = wholespace_norm(WholeSpace::calderon, ef, fw, v).value;
      rows.push_back(r);
    }
    std::set<std::string> seen;
    for (double s : cfg_.s_values)
      for (double p : cfg_.p_values)
        for (double q : cfg_.q_values)
          for (double u0 : cfg_.u_values) {
            const double u = u0 == 0.0 ? p : u0;
            const SpaceParams v{s, k, p, q, u};
            const std::string vl = "s" + num(s) + "p" + num(p) + "q" + num(q) + "u" + num(u);
            if (!seen.insert(vl).second) continue;
            if (admissibility_violation(v, Space::triebel_lizorkin).empty()) {
              NormRow r{"F/" + vl, Space::triebel_lizorkin};
              r.sup = std::isinf(q);
              r.intrinsic = trace_norm(Space::triebel_lizorkin, f, fs, v).value;
              r.whole = wholespace_norm(WholeSpace::triebel_lizorkin, ef, fw, v).value;
              rows.push_back(r);
            }
            if (admissibility_violation(v, Space::besov).empty()) {
              NormRow r{"B/" + vl, Space::besov};
              r.sup = std::isinf(q);
              r.intrinsic = trace_norm(Space::besov, f, fs, v).value;
              r.whole = wholespace_norm(WholeSpace::besov_localapprox, ef, fw, v).value;
              if (auto it = omega.find(p); it != omega.end())
                r.whole_modulus = wholespace_norm(WholeSpace::besov_modulus, ef, fw, v, &it->second).value;
              rows.push_back(r);
            }
          }
    return rows;
  }

  void boundary_sample(Entry& e, const GridFunction& f, const LocalApproxField& fs) {
    for (double s : {0.3, 0.7}) {
      const SpaceParams v{s, 1, kInf, kInf, kInf};
      boundary_[e.set->name][e.level][s] = trace_norm(Space::besov, f, fs, v).seminorm;
    }
  }

  void quadrature_samples(Entry& e, int k, const GridFunction& f, const GridFunction& ef,
                          const LocalApproxField& fs, const std::vector<NormRow>& rows, double tiny,
                          const std::string& label, EntryAccum& acc) {
    const RadiusLadder fine(e.grid.h(), e.grid.r_max(), 2.0 * cfg_.ladder_density);
    const FieldOptions fo = field_options(e.grid);
    const LocalApproxField fs2(f, &e.s.cells, k, fine, fo);
    const LocalApproxField fw2(ef, nullptr, k, fine, fo);
    std::map<double, std::vector<double>> omega2;
    for (double p : cfg_.p_values) omega2[p] = modulus_continuity_curve(ef, k, p, fine);
    const std::vector<NormRow> rows2 = norm_rows(k, f, ef, fs2, fw2, omega2);
    auto gap = [&](double a, double b, const std::string& where, bool sup) {
      const double d = std::abs(a - b) / std::max(std::abs(b), tiny);
      ++acc.density_samples;
      if (!sup) acc.density_gap_finite_q = std::max(acc.density_gap_finite_q, d);
      if (d > acc.density_gap) {
        acc.density_gap = d;
        acc.density_worst = where;
      }
    };
    for (std::size_t i = 0; i < rows.size() && i < rows2.size(); ++i) {
      const std::string where = label + "/" + rows[i].label;
      gap(rows2[i].intrinsic, rows[i].intrinsic, where + "/intrinsic", rows[i].sup);
      gap(rows2[i].whole, rows[i].whole, where + "/whole", rows[i].sup);
      if (rows[i].whole_modulus >= 0.0)
        gap(rows2[i].whole_modulus, rows[i].whole_modulus, where + "/modulus", rows[i].sup);
    }
    for (const SpaceParams& v0 : sharp_params(k)) {
      if (v0.s >= k) continue;  // q < inf needs s < k
      SpaceParams a = v0, b = v0;
      a.q = 64.0;
      b.q = kInf;
      const GridFunction ga = generalized_sharp(fs, a, kInf);
      const GridFunction gb = generalized_sharp(fs, b, kInf);
      for (std::size_t c : fs.domain_cells()) {
        if (!(gb[c] > tiny)) continue;
        ++acc.q64_samples;
        acc.q64_gap = std::max(acc.q64_gap, std::abs(ga[c] - gb[c]) / gb[c]);
      }
    }
  }

  // ---------------------------------------------------------------- emission

  void emit_ratio(const std::string& name, const char* paper_ref, const Ratio& r, double tolerance,
                  ordered_json extra = ordered_json::object(), bool extra_ok = true) {
    const bool coverage = r.skip_fraction() <= cfg_.tol.skip_fraction;
    ordered_json d = r.json_value();
    d["skip_fraction"] = r.skip_fraction();
    if (!coverage) d["reason"] = "insufficient coverage: too many box-truncation skips";
    for (auto it = extra.begin(); it != extra.end(); ++it) d[it.key()] = it.value();
    const bool pass = r.finite() && coverage && extra_ok && (std::isinf(tolerance) || r.value <= tolerance);
    add(result(name, paper_ref, pass, r.value, r.samples, tolerance, d));
  }

  void emit_entry(const Entry& e, EntryAccum& acc) {
    const std::string& tag = e.tag;
    const std::string& set = e.set->name;
    const int n = e.grid.n();
    auto per_set = [&](const std::string& check, const char* paper_ref, const Ratio& r, double tol = kInf,
                       ordered_json extra = ordered_json::object(), bool extra_ok = true) {
      emit_ratio(check + "/" + tag, paper_ref, r, tol, std::move(extra), extra_ok);
      if (r.samples > 0) record_drift(check + "/" + set, e.level, r.value, paper_ref);
    };
    if (on("extension")) {
      Ratio all_a, all_l;
      for (const auto& [key, r] : acc.approx) {
        all_a.merge(r);
        corpus_["approx_preservation/n" + std::to_string(n) + "/" + key][e.level].merge(r);
        corpus_ref_["approx_preservation/n" + std::to_string(n) + "/" + key] = ref::approx;
      }
      for (const auto& [key, r] : acc.lu) {
        all_l.merge(r);
        corpus_["lu_bound/n" + std::to_string(n) + "/" + key][e.level].merge(r);
        corpus_ref_["lu_bound/n" + std::to_string(n) + "/" + key] = ref::lu_bound;
      }
      emit_ratio("approx_preservation/" + tag, ref::approx, all_a, kInf);
      emit_ratio("lu_bound/" + tag, ref::lu_bound, all_l, kInf);
    }
    if (on("pointwise")) {
      ordered_json x;
      x["note"] = "no violation found at " + std::to_string(acc.pointwise.samples) + " samples";
      per_set("pointwise_local", ref::pointwise, acc.pointwise, kInf, x);
    }
    if (on("maximal")) {
      ordered_json x;
      x["sample_cells"] = e.samples.size();
      const bool enough = e.samples.size() >= std::min<std::size_t>(cfg_.pointwise_samples, 1000);
      if (!enough) x["reason"] = "fewer stratified samples than requested";
      per_set("maximal_pointwise", ref::maximal, acc.maximal, kInf, x, enough);
      per_set("sharp_norm", ref::sharp_norm, acc.sharp_norm);
      for (const auto& [key, r] : acc.hlw) {
        emit_ratio("hlw/" + tag + "/" + key, ref::hlw, r, cfg_.tol.hlw);
        corpus_["hlw/n" + std::to_string(n) + "/" + key][e.level].merge(r);
        corpus_ref_["hlw/n" + std::to_string(n) + "/" + key] = ref::hlw;
      }
    }
    if (on("moduli")) {
      per_set("sandwich", ref::sandwich, acc.sandwich);
      per_set("qmon", ref::qmon, acc.qmon);
      per_set("eqm", ref::eqm, acc.eqm);
      per_set("difm", ref::difm, acc.difm);
      per_set("kps", ref::kps, acc.kps);
      ordered_json x;
      x["consistency"] = acc.ms_consistency.json_value();
      const bool consistent = acc.ms_consistency.finite() && acc.ms_consistency.value <= 1.0 + cfg_.tol.ms;
      per_set("ms", ref::ms, acc.ms, kInf, x, consistent);
      per_set("bounded_tail", ref::tail, acc.tail);
      const double split_bound = std::pow(5.0, n);
      ordered_json s;
      s["bound"] = split_bound;
      add(result("packing_split/" + tag, ref::split, acc.split_max <= split_bound, acc.split_max,
                 acc.split_samples, split_bound, s));
    }
    if (on("equivalence")) {
      for (const auto& [space, r] : acc.equivalence) {
        const Ratio& restr = acc.restriction[space];
        ordered_json x;
        x["restriction"] = restr.json_value();
        if (acc.modulus_equivalence.count(space)) x["modulus_form"] = acc.modulus_equivalence[space].json_value();
        const bool restr_ok = restr.finite() && restr.value <= cfg_.tol.restriction;
        emit_ratio("equivalence/" + tag + "/" + space, ref::equivalence, r, kInf, x, restr_ok);
        const std::string key = "equivalence/n" + std::to_string(n) + "/" + space;
        corpus_[key][e.level].merge(r);
        corpus_ref_[key] = ref::equivalence;
        corpus_[key + "#restriction"][e.level].merge(restr);
      }
    }
    if (on("quadrature") && e.level == 0) {
      ordered_json d;
      d["worst"] = acc.density_worst;
      d["max_gap_finite_q"] = acc.density_gap_finite_q;
      d["ladder_density"] = cfg_.ladder_density;
      add(result("quadrature_density/" + tag, ref::density, acc.density_gap < cfg_.tol.ladder_density,
                 acc.density_gap, acc.density_samples, cfg_.tol.ladder_density, d));
      add(result("q64/" + tag, ref::q64, acc.q64_gap <= cfg_.tol.q64, acc.q64_gap, acc.q64_samples, cfg_.tol.q64,
                 ordered_json::object()));
    }
  }

  void emit_corpus_wide() {
    for (const auto& [key, levels] : corpus_) {
      if (key.find('#') != std::string::npos) continue;
      const char* paper_ref = corpus_ref_[key].c_str();
      ordered_json d = ordered_json::object();
      bool pass = true;
      double c = 0.0;
      std::size_t samples = 0;
      for (const auto& [level, r] : levels) {
        ordered_json lv = r.json_value();
        lv["skip_fraction"] = r.skip_fraction();
        d["level" + std::to_string(level)] = lv;
        pass = pass && r.finite() && r.skip_fraction() <= cfg_.tol.skip_fraction;
        c = std::max(c, r.value);
        samples += r.samples;
      }
      if (levels.size() >= 2) {
        const double a = levels.begin()->second.value, b = levels.rbegin()->second.value;
        const double ratio = (a <= 1e-12 && b <= 1e-12) ? 1.0 : a / b;
        d["drift"] = jnum(ratio);
        pass = pass && std::isfinite(ratio) && ratio <= cfg_.tol.drift && ratio >= 1.0 / cfg_.tol.drift;
      }
      double tolerance = kInf;
      if (key.rfind("hlw/", 0) == 0) {
        tolerance = cfg_.tol.hlw;
        pass = pass && c < tolerance;
      }
      if (auto it = corpus_.find(key + "#restriction"); it != corpus_.end()) {
        double worst = 0.0;
        bool finite = true;
        for (const auto& [level, r] : it->second) {
          worst = std::max(worst, r.value);
          finite = finite && r.finite();
        }
        d["restriction"] = jnum(worst);
        d["restriction_tolerance"] = cfg_.tol.restriction;
        pass = pass && finite && worst <= cfg_.tol.restriction;
      }
      add(result(key, paper_ref, pass, c, samples, tolerance, d));
    }
    for (const auto& [set, levels] : boundary_) {
      if (levels.size() < 2) continue;
      const auto& a = levels.begin()->second;
      const auto& b = levels.rbegin()->second;
      if (!a.count(0.3) || !a.count(0.7) || !b.count(0.3) || !b.count(0.7)) continue;
      const double g_lo = b.at(0.3) / std::max(a.at(0.3), 1e-300);
      const double g_hi = b.at(0.7) / std::max(a.at(0.7), 1e-300);
      ordered_json d;
      d["growth_s0.3"] = jnum(g_lo);
      d["growth_s0.7"] = jnum(g_hi);
      d["note"] = "cusp exponent 1/2, p = q = u = inf: the seminorm should grow under refinement only above s = 1/2";
      add(result("finiteness_boundary/" + set, ref::boundary, g_hi > g_lo, g_hi / g_lo, 2, 1.0, d));
    }
  }

  void emit_drift() {
    for (const auto& [key, levels] : drift_) {
      if (levels.size() < 2) continue;
      const double a = levels.begin()->second, b = levels.rbegin()->second;
      const double ratio = (a <= 1e-12 && b <= 1e-12) ? 1.0 : a / b;
      const bool pass = std::isfinite(ratio) && ratio <= cfg_.tol.drift && ratio >= 1.0 / cfg_.tol.drift;
      ordered_json d;
      d["coarse"] = jnum(a);
      d["fine"] = jnum(b);
      add(result("drift/" + key, drift_ref_[key].c_str(), pass, ratio, levels.size(), cfg_.tol.drift, d));
    }
  }

  const VerifyConfig& cfg_;
  Report report_;
  std::vector<VerifyTiming> timings_;
  std::map<std::string, std::map<int, double>> drift_;
  std::map<std::string, std::string> drift_ref_;
  std::map<std::string, std::pair<std::vector<Point>, std::vector<double>>> approx_plan_;
  std::map<std::string, LevelRatios> corpus_;
  std::map<std::string, std::string> corpus_ref_;
  std::map<std::string, std::map<int, std::map<double, double>>> boundary_;
};

}  // namespace

VerifyRun run_verification(const VerifyConfig& config) {
  Runner runner(config);
  VerifyRun out = runner.run();
  if (!config.output.empty()) write_report(config.output, out.report, config.format);
  return out;
}

}  // namespace regext

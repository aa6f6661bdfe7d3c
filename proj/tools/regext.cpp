#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "regext/corpus.hpp"
#include "regext/extension.hpp"
#include "regext/functionals.hpp"
#include "regext/io.hpp"
#include "regext/parallel.hpp"
#include "regext/verify.hpp"

using namespace regext;
using nlohmann::ordered_json;

namespace {

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

double parse_number(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// "n,d_1..d_n,o_1..o_n,h"
Grid parse_grid(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.empty()) throw Error("--grid: empty");
  const int n = std::stoi(parts[0]);
  if (n < 1 || n > kMaxDim) throw Error("--grid: dimension must be 1.." + std::to_string(kMaxDim));
  if (parts.size() != static_cast<std::size_t>(2 * n + 2))
    throw Error("--grid expects n, n dims, n origins and h (" + std::to_string(2 * n + 2) + " values)");
  Index dims{1, 1, 1};
  Point origin{};
  for (int i = 0; i < n; ++i) {
    dims[i] = std::stoi(parts[1 + i]);
    origin[i] = parse_number(parts[1 + n + i]);
  }
  return Grid(n, dims, origin, parse_number(parts[2 * n + 1]));
}

SpaceParams parse_params(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 5) throw Error("--params expects s,k,p,q,u");
  SpaceParams v;
  v.s = parse_number(parts[0]);
  v.k = std::stoi(parts[1]);
  v.p = parse_number(parts[2]);
  v.q = parse_number(parts[3]);
  v.u = parts[4] == "p" ? v.p : parse_number(parts[4]);
  return v;
}

// Merges --params JSON into a spec object of the given kind.
std::string with_kind(const std::string& kind, const std::string& params) {
  ordered_json j = params.empty() ? ordered_json::object() : ordered_json::parse(params);
  if (!j.is_object()) throw Error("--params must be a JSON object");
  j["kind"] = kind;
  return j.dump();
}

void write_json(const std::string& path, const ordered_json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
}

RegularSet load_regular(const std::string& path) { return make_regular_set(io::load_set(path)); }

Space space_arg(const std::string& s) {
  if (s == "sobolev" || s == "W") return Space::sobolev;
  if (s == "tl" || s == "F") return Space::triebel_lizorkin;
  if (s == "besov" || s == "B") return Space::besov;
  throw Error("--space must be sobolev, tl or besov");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whitney-type extension of functions on regular sets, with trace-space diagnostics"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware)");

  // gen-set
  auto* gen_set = app.add_subcommand("gen-set", "Rasterise a set and write it in SET1 format");
  std::string kind, params_json, grid_text, out;
  gen_set->add_option("--kind", kind, "box, half_space, fat_cantor, fat_carpet, lipschitz_subgraph, union_of")
      ->required();
  gen_set->add_option("--params", params_json, "Remaining set parameters as a JSON object");
  gen_set->add_option("--grid", grid_text, "n,dims...,origin...,h")->required();
  gen_set->add_option("--out", out, "Output .set file")->required();

  // estimate-reg
  auto* est = app.add_subcommand("estimate-reg", "Measure the regularity constants theta and delta of a set");
  std::string set_path;
  est->add_option("--set", set_path)->required();

  // whitney
  auto* wh = app.add_subcommand("whitney", "Dyadic Whitney decomposition of the complement");
  double min_radius = 0.0;
  wh->add_option("--set", set_path)->required();
  wh->add_option("--out", out, "cubes.json (default stdout)");
  wh->add_option("--min-radius", min_radius, "Do not split cubes below this radius");

  // extend
  auto* ext = app.add_subcommand("extend", "Extend a function from S to the whole box");
  std::string fn_path, meta_path;
  int k = 1;
  ext->add_option("--set", set_path)->required();
  ext->add_option("--fn", fn_path)->required();
  ext->add_option("--k", k)->check(CLI::Range(1, 8));
  ext->add_option("--out", out, "Output .gfn file")->required();
  ext->add_option("--meta", meta_path, "Sidecar JSON (default <out>.json)");

  // norm
  auto* nrm = app.add_subcommand("norm", "Trace functional of f on S, or whole-box functional without --set");
  std::string space_name = "besov", vparams = "0.5,1,2,2,1";
  bool modulus = false;
  double density = 4.0;
  nrm->add_option("--fn", fn_path)->required();
  nrm->add_option("--set", set_path);
  nrm->add_option("--space", space_name, "sobolev | tl | besov");
  nrm->add_option("--params", vparams, "s,k,p,q,u (inf allowed, u may be p)");
  nrm->add_flag("--modulus", modulus, "Whole-box Besov norm through the modulus of continuity");
  nrm->add_option("--density", density, "Radius ladder points per octave");
  nrm->add_option("--out", out, "Output JSON (default stdout)");

  // verify
  auto* ver = app.add_subcommand("verify", "Run the verification harness");
  std::string config_path, format_name, fault;
  std::vector<std::string> checks;
  ver->add_option("--config", config_path, "JSON config; defaults to the built-in corpus");
  ver->add_option("--out", out, "Report path (overrides the config)");
  ver->add_option("--format", format_name, "json | csv");
  ver->add_option("--checks", checks, "Restrict to these check groups");
  ver->add_option("--fault", fault, "Fault injection (skip_normalization)");

  // gen-fn
  auto* gen_fn = app.add_subcommand("gen-fn", "Sample a corpus function on a grid and write it in GFN1 format");
  std::string fn_kind = "constant";
  gen_fn->add_option("--kind", fn_kind, "constant, polynomial, cusp, sine, noise");
  gen_fn->add_option("--params", params_json, "Remaining function parameters as a JSON object");
  auto* grid_opt = gen_fn->add_option("--grid", grid_text, "n,dims...,origin...,h");
  gen_fn->add_option("--set", set_path, "Take the grid from this set")->excludes(grid_opt);
  gen_fn->add_option("--out", out, "Output .gfn file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads) set_thread_count(threads);

    if (*gen_set) {
      const Grid g = parse_grid(grid_text);
      io::save_set(out, rasterize(parse_set_spec(with_kind(kind, params_json)), g));
      return 0;
    }

    if (*est) {
      const RegularSet s = load_regular(set_path);
      ordered_json j;
      j["theta"] = num(s.estimate.theta);
      j["delta"] = num(s.estimate.delta);
      j["centers_sampled"] = s.estimate.centers_sampled;
      j["radii"] = s.estimate.radii;
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*wh) {
      const RegularSet s = load_regular(set_path);
      WhitneyOptions o;
      o.min_radius = min_radius;
      const WhitneyDecomposition w = whitney_decompose(s, o);
      ordered_json arr = ordered_json::array();
      for (const auto& c : w.cubes()) {
        ordered_json e;
        e["center"] = std::vector<double>(c.cube.center.begin(), c.cube.center.begin() + s.grid().n());
        e["radius"] = c.cube.radius;
        e["flagged"] = c.flagged();
        arr.push_back(std::move(e));
      }
      write_json(out, arr);
      return 0;
    }

    if (*ext) {
      const RegularSet s = load_regular(set_path);
      const GridFunction f = io::load_gfn(fn_path);
      const ExtensionOperator op(s, k);
      const Extension e = extend(f, op);
      io::save_gfn(out, e.values);
      ordered_json j;
      j["epsilon"] = op.epsilon();
      j["gamma1"] = num(op.quasicubes().gamma1);
      j["gamma2"] = op.quasicubes().gamma2;
      j["deficiency_count"] = e.projectors.deficient;
      write_json(meta_path.empty() ? out + ".json" : meta_path, j);
      return 0;
    }

    if (*nrm) {
      const GridFunction f = io::load_gfn(fn_path);
      const SpaceParams v = parse_params(vparams);
      const Space space = space_arg(space_name);
      const Grid& g = f.grid();
      const RadiusLadder ladder(g.h(), g.r_max(), density);
      FieldOptions fo;
      if (std::isfinite(v.u) && v.u != 1.0 && v.u != 2.0) fo.extra_u = v.u;
      NormValue r;
      if (!set_path.empty()) {
        const CellSet s = io::load_set(set_path);
        if (s.grid() != g) throw Error("--fn and --set live on different grids");
        const LocalApproxField field(f, &s, v.k, ladder, fo);
        r = trace_norm(space, f, field, v);
      } else {
        const LocalApproxField field(f, nullptr, v.k, ladder, fo);
        if (space == Space::besov && modulus) {
          const auto omega = modulus_continuity_curve(f, v.k, v.p, ladder);
          r = wholespace_norm(WholeSpace::besov_modulus, f, field, v, &omega);
        } else {
          const WholeSpace w = space == Space::sobolev            ? WholeSpace::calderon
                               : space == Space::triebel_lizorkin ? WholeSpace::triebel_lizorkin
                                                                  : WholeSpace::besov_localapprox;
          r = wholespace_norm(w, f, field, v);
        }
      }
      ordered_json j;
      j["value"] = num(r.value);
      j["parts"] = {{"lp", num(r.lp)}, {"seminorm", num(r.seminorm)}};
      if (r.unvalidated) j["unvalidated"] = true;
      j["ladder"] = {{"h", g.h()}, {"density", density}, {"radii", ladder.values()}};
      write_json(out, j);
      return 0;
    }

    if (*ver) {
      VerifyConfig c = config_path.empty() ? default_verify_config() : load_verify_config(config_path);
      if (!out.empty()) c.output = out;
      if (!format_name.empty()) c.format = report_format_from_string(format_name);
      if (!fault.empty()) {
        if (fault != "skip_normalization") throw Error("unknown fault '" + fault + "'");
        c.fault = fault;
      }
      for (const auto& g : checks) {
        const auto& known = verify_groups();
        if (std::find(known.begin(), known.end(), g) == known.end()) throw Error("unknown check group '" + g + "'");
        c.groups.insert(g);
      }
      const VerifyRun run = run_verification(c);
      if (c.output.empty()) std::cout << emit_report(run.report, c.format) << '\n';
      std::size_t failed = 0, skipped = 0;
      for (const auto& r : run.report) {
        failed += r.status == Status::fail;
        skipped += r.status == Status::skipped;
        if (r.status == Status::fail) std::cerr << "FAIL " << r.name << '\n';
      }
      for (const auto& t : run.timings) std::cerr << "time " << t.label << ' ' << t.seconds << " s\n";
      std::cerr << run.report.size() << " checks, " << failed << " failed, " << skipped << " skipped\n";
      return exit_code(run.report);
    }

    if (*gen_fn) {
      const Grid g = !set_path.empty() ? io::load_set(set_path).grid() : parse_grid(grid_text);
      if (set_path.empty() && grid_text.empty()) throw Error("gen-fn needs --grid or --set");
      io::save_gfn(out, make_function(parse_function_spec(with_kind(fn_kind, params_json)), g));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

#pragma once

#include <string>
#include <vector>

#include "regext/regular_set.hpp"

namespace regext {

enum class FunctionKind { constant, polynomial, cusp, sine, noise };

std::string to_string(FunctionKind kind);
FunctionKind function_kind_from_string(const std::string& name);

/// One corpus function. Only the fields relevant to `kind` are read.
struct FunctionSpec {
  FunctionKind kind = FunctionKind::constant;
  std::string name;
  double value = 1.0;      // constant value, amplitude of the others
  int degree = 1;          // polynomial: sum_i x_i^d plus the mixed term x_0 x_1^{d-1} in 2-D
  double sigma = 0.5;      // cusp |x - x0|_inf^sigma
  Point x0{};              // cusp location
  double lambda = 1.0;     // sine sin(pi lambda (x_0 + ... + x_{n-1}))
  unsigned seed = 1;       // noise: seeded normal values on a lattice
  int lattice = 64;        //   with this many intervals per axis, smoothed by cubic B-splines
};

GridFunction make_function(const FunctionSpec& spec, const Grid& grid);

/// Constants, coordinate polynomials of degree 1..max_degree, cusps sigma in {0.5, 1.5} at the
/// S cell nearest `anchor`, sin(pi lambda sum x) for lambda in {1, 4}, and mollified noise.
std::vector<FunctionSpec> default_functions(const RegularSet& s, int max_degree, unsigned seed,
                                            const Point& anchor);

struct CorpusSet {
  std::string name;
  int n = 1;
  SetSpec spec;
  Point box_lo{};
  Point box_hi{};
  std::vector<int> resolutions;  // cells per axis, coarse first
};

/// 1-D fat Cantor set, half-line and two-interval union on [-1, 3]; 2-D fat carpet, square and
/// Lipschitz subgraph on [-0.5, 1.5]^2.
std::vector<CorpusSet> default_corpus();

/// Cubic grid on the set's box with `cells` cells per axis.
Grid corpus_grid(const CorpusSet& c, int cells);

SetSpec parse_set_spec(const std::string& json);
std::string set_spec_json(const SetSpec& spec);
FunctionSpec parse_function_spec(const std::string& json);
std::string function_spec_json(const FunctionSpec& spec);

}  // namespace regext

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "regext/whitney.hpp"

namespace regext {

/// min(1, (2 N 12^n theta)^{-1/n}).
double default_epsilon(double theta, int n, double overlap = 1.0);

struct QuasiCubeFamily {
  double epsilon = 0.0;
  double delta = 0.0;
  /// H_Q as sorted flat cell indices, one entry per Whitney cube (empty when diam Q > delta).
  std::vector<std::vector<std::uint32_t>> cells;
  std::vector<bool> small;  // diam Q <= delta

  double gamma1 = 0.0;  // max |Q| / |H_Q| over small Q (inf if some H_Q is empty)
  int gamma2 = 0;       // max number of H_Q containing one S cell
  std::size_t cubes_total = 0;
  std::size_t cubes_small = 0;
  std::size_t cubes_with_h = 0;
  std::size_t empty_small = 0;
  std::size_t inclusion_violations = 0;  // H_Q cells outside 10Q or outside S
  std::size_t mechanism_violations = 0;  // overlapping pairs breaking the disjointness mechanism
  double min_small_radius = 0.0;

  const std::vector<std::uint32_t>& operator[](std::size_t q) const { return cells[q]; }
  bool valid() const {
    return inclusion_violations == 0 && mechanism_violations == 0 && std::isfinite(gamma1);
  }
};

struct QuasiCubeOptions {
  double gamma1_cap = kInf;
  int max_halvings = 8;
  /// Skip the pairwise disjointness audit (it is quadratic in the overlap).
  bool audit_mechanism = true;
};

/// Requires epsilon * (smallest radius among cubes with diam <= delta) >= h.
QuasiCubeFamily build_quasicubes(const RegularSet& s, const WhitneyDecomposition& w, double epsilon,
                                 const QuasiCubeOptions& opts = {});

struct EpsilonSearch {
  double epsilon = 0.0;
  QuasiCubeFamily family;
  std::vector<std::string> diagnostics;
};

/// Halves epsilon from eps0 until the family is valid and gamma1 <= cap; falls back to
/// default_epsilon. Throws with the per-candidate diagnostics when nothing passes.
EpsilonSearch auto_epsilon(const RegularSet& s, const WhitneyDecomposition& w, double eps0,
                           const QuasiCubeOptions& opts = {});

}  // namespace regext

#pragma once

#include <string>
#include <vector>

#include "regext/approx.hpp"

namespace regext {

struct ExtensionOptions {
  /// First epsilon tried; halved until the quasi-cube family is valid.
  double eps0 = 0.25;
  /// Whitney cubes are not split below floor_cells * h / epsilon; 0 picks a k-dependent default.
  double floor_cells = 0.0;
  /// Partition-of-unity smoothness; 0 means max(k, 1).
  int smoothness = 0;
  QuasiCubeOptions quasi;
  WhitneyOptions whitney;
};

/// Default Whitney floor in cells for order k.
double default_floor_cells(int k);

/// The linear extension operator for a fixed (S, k); carries no space parameters.
class ExtensionOperator {
 public:
  ExtensionOperator(const RegularSet& s, int k, const ExtensionOptions& opts = {});

  const RegularSet& set() const { return s_; }
  const WhitneyDecomposition& whitney() const { return w_; }
  const PartitionOfUnity& partition() const { return pu_; }
  const QuasiCubeFamily& quasicubes() const { return h_; }
  int k() const { return k_; }
  double epsilon() const { return h_.epsilon; }
  const std::vector<std::string>& epsilon_diagnostics() const { return diagnostics_; }

 private:
  RegularSet s_;
  int k_;
  WhitneyDecomposition w_;
  QuasiCubeFamily h_;
  PartitionOfUnity pu_;
  std::vector<std::string> diagnostics_;
};

struct Extension {
  GridFunction values;
  ProjectorMap projectors;
};

/// f is read on S cells only.
Extension extend(const GridFunction& f, const ExtensionOperator& op);

struct NormCheck {
  double lhs = 0.0;  // ||Ef||_{L_u(K)}
  double rhs = 0.0;  // ||f||_{L_u(25K cap S)}
  bool skipped = false;
  std::string reason;
};

/// K must be centered in S and contained in the box; otherwise the result is a flagged skip.
NormCheck extend_norm_check(const GridFunction& f, const GridFunction& ef, const RegularSet& s, const Cube& k,
                            double u);

}  // namespace regext

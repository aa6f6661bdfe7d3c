#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "regext/polynomial.hpp"
#include "regext/quasicube.hpp"

namespace regext {

struct ProjectorResult {
  Polynomial poly;
  int rank = 0;
  bool deficient = false;  // some basis directions dropped
  bool empty = false;
};

/// Discrete L2(A) least-squares polynomial of degree <= k - 1 via pivoted Gram
/// factorisation in the monomial basis centered and scaled to A's bounding cube.
/// Pivots below 1e-10 ||G|| are dropped and flagged.
ProjectorResult projector(const GridFunction& f, std::span<const std::uint32_t> cells, int k);
ProjectorResult projector(const GridFunction& f, const CellSet& a, int k);

enum class ApproxMode { fast, exact };

struct ApproxResult {
  double value = 0.0;
  Polynomial poly;
  bool deficient = false;
};

/// E_k(f; A)_{L_u}. u = 2 is always exact; u = 1, inf use the L2 projector in fast mode
/// and a linear program in exact mode; other u are fast only.
ApproxResult local_best_approx(const GridFunction& f, std::span<const std::uint32_t> cells, int k, double u,
                               ApproxMode mode = ApproxMode::fast);
ApproxResult local_best_approx(const GridFunction& f, const CellSet& a, int k, double u,
                               ApproxMode mode = ApproxMode::fast);

/// |Q|^{-1/u} E_k(f; Q cap S)_{L_u} with |Q| = (2r)^n; k = 0 uses P = 0.
double normalized_local_approx(const GridFunction& f, const Cube& q, const CellSet& s, int k, double u,
                               ApproxMode mode = ApproxMode::fast);

/// Residual norms of the L2 fit on the cells of S inside a cube, all three exponents at once.
struct LocalErrors {
  double l1 = 0.0;    // sum |r| h^n
  double l2sq = 0.0;  // sum r^2 h^n
  double linf = 0.0;
  double lp = 0.0;    // sum |r|^p h^n for the extra exponent, if requested
  std::size_t cells = 0;
  bool deficient = false;

  double norm(double u, double extra_p = 0.0) const;
};

/// Scratch buffers reused across calls on one thread.
struct FitWorkspace {
  std::vector<double> coords, values, basis, gram, rhs, coeffs;
};

/// Fit on {c in cube : mask == nullptr or mask contains c}; extra_p > 0 also accumulates
/// sum |r|^extra_p. k = 0 measures f itself.
LocalErrors cube_fit_errors(const GridFunction& f, const CellSet* mask, const Cube& q, int k, double extra_p,
                            FitWorkspace& ws);

struct ProjectorMap {
  std::vector<Polynomial> poly;
  std::vector<bool> zero;  // diam Q > delta, or H_Q empty
  std::size_t deficient = 0;
  std::vector<bool> deficient_cube;
};

/// P_Q f = projector(f, H_Q, k) for small Q, 0 otherwise.
ProjectorMap assign_pq(const GridFunction& f, const WhitneyDecomposition& w, const QuasiCubeFamily& h, int k);

}  // namespace regext

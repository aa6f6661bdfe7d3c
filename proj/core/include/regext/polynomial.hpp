#pragma once

#include <vector>

#include "regext/grid.hpp"

namespace regext {

/// Exponent vectors with |beta| <= k - 1, by total degree then lexicographically.
std::vector<Index> multi_indices(int n, int k);
/// C(n + k - 1, n): dimension of polynomials of degree <= k - 1 (0 for k = 0).
int poly_dim(int n, int k);

/// Degree <= k - 1 polynomial in the basis ((x - center) / scale)^beta.
struct Polynomial {
  int n = 1;
  int k = 0;
  Point center{};
  double scale = 1.0;
  std::vector<double> coeffs;

  Polynomial() = default;
  Polynomial(int n_, int k_, Point c = {}, double s = 1.0);

  double operator()(const Point& x) const;
  bool is_zero() const;
  /// Same polynomial re-expanded around another center/scale.
  Polynomial rebased(const Point& c, double s) const;
};

/// Writes the basis values at x into out (size poly_dim(n, k)).
void basis_values(const std::vector<Index>& betas, int n, int k, const Point& center, double scale,
                  const Point& x, double* out);

/// Pivoted Cholesky of a symmetric positive semidefinite matrix (row-major, dim x dim),
/// stopping at pivots below tol * max diagonal. Solves G c = b on the kept pivots and
/// zeroes the rest. Returns the rank.
int pivoted_cholesky_solve(std::vector<double> g, std::vector<double> b, int dim, double tol,
                           std::vector<double>& x);

}  // namespace regext

#include "regext/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace regext {

std::vector<Index> multi_indices(int n, int k) {
  std::vector<Index> out;
  for (int deg = 0; deg <= k - 1; ++deg) {
    if (n == 1) {
      out.push_back({deg, 0, 0});
    } else if (n == 2) {
      for (int a = deg; a >= 0; --a) out.push_back({a, deg - a, 0});
    } else {
      for (int a = deg; a >= 0; --a)
        for (int b = deg - a; b >= 0; --b) out.push_back({a, b, deg - a - b});
    }
  }
  return out;
}

int poly_dim(int n, int k) {
  if (k <= 0) return 0;
  double r = 1.0;
  for (int i = 1; i <= n; ++i) r = r * (k - 1 + i) / i;
  return static_cast<int>(std::lround(r));
}

Polynomial::Polynomial(int n_, int k_, Point c, double s)
    : n(n_), k(k_), center(c), scale(s), coeffs(poly_dim(n_, k_), 0.0) {}

void basis_values(const std::vector<Index>& betas, int n, int k, const Point& center, double scale,
                  const Point& x, double* out) {
  double pw[kMaxDim][16];
  const int top = std::max(k, 1);
  for (int i = 0; i < n; ++i) {
    const double z = (x[i] - center[i]) / scale;
    pw[i][0] = 1.0;
    for (int d = 1; d < top && d < 16; ++d) pw[i][d] = pw[i][d - 1] * z;
  }
  for (std::size_t j = 0; j < betas.size(); ++j) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= pw[i][betas[j][i]];
    out[j] = v;
  }
}

double Polynomial::operator()(const Point& x) const {
  if (coeffs.empty()) return 0.0;
  const auto betas = multi_indices(n, k);
  std::vector<double> b(betas.size());
  basis_values(betas, n, k, center, scale, x, b.data());
  double v = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) v += coeffs[j] * b[j];
  return v;
}

bool Polynomial::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

Polynomial Polynomial::rebased(const Point& c, double s) const {
  // Interpolate on a unisolvent tensor lattice; exact up to rounding.
  Polynomial out(n, k, c, s);
  if (coeffs.empty()) return out;
  const auto betas = multi_indices(n, k);
  const int dim = static_cast<int>(betas.size());
  std::vector<double> g(dim * dim, 0.0), rhs(dim, 0.0), row(dim);
  const int m = std::max(k, 1);
  int total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  for (int p = 0; p < total; ++p) {
    Point x = c;
    int rem = p;
    for (int i = 0; i < n; ++i) {
      const int j = rem % m;
      rem /= m;
      x[i] = c[i] + s * (m == 1 ? 0.0 : -1.0 + 2.0 * j / (m - 1));
    }
    basis_values(betas, n, k, c, s, x, row.data());
    const double v = (*this)(x);
    for (int a = 0; a < dim; ++a) {
      rhs[a] += row[a] * v;
      for (int b = 0; b < dim; ++b) g[a * dim + b] += row[a] * row[b];
    }
  }
  pivoted_cholesky_solve(g, rhs, dim, 1e-14, out.coeffs);
  return out;
}

int pivoted_cholesky_solve(std::vector<double> g, std::vector<double> b, int dim, double tol,
                           std::vector<double>& x) {
  x.assign(dim, 0.0);
  if (dim == 0) return 0;
  std::vector<int> perm(dim);
  for (int i = 0; i < dim; ++i) perm[i] = i;
  double gmax = 0.0;
  for (int i = 0; i < dim; ++i) gmax = std::max(gmax, g[i * dim + i]);
  if (!(gmax > 0.0)) return 0;
  const double cut = tol * gmax;
  auto at = [&](int i, int j) -> double& { return g[i * dim + j]; };
  int rank = 0;
  // In-place outer-product Cholesky on the permuted matrix; L stored in the lower triangle.
  for (; rank < dim; ++rank) {
    int piv = rank;
    for (int i = rank + 1; i < dim; ++i)
      if (at(i, i) > at(piv, piv)) piv = i;
    if (!(at(piv, piv) > cut)) break;
    if (piv != rank) {
      for (int j = 0; j < dim; ++j) std::swap(at(rank, j), at(piv, j));
      for (int i = 0; i < dim; ++i) std::swap(at(i, rank), at(i, piv));
      std::swap(b[rank], b[piv]);
      std::swap(perm[rank], perm[piv]);
    }
    const double d = std::sqrt(at(rank, rank));
    at(rank, rank) = d;
    for (int i = rank + 1; i < dim; ++i) at(i, rank) /= d;
    for (int i = rank + 1; i < dim; ++i)
      for (int j = rank + 1; j <= i; ++j) {
        at(i, j) -= at(i, rank) * at(j, rank);
        at(j, i) = at(i, j);
      }
  }
  std::vector<double> y(rank);
  for (int i = 0; i < rank; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= at(i, j) * y[j];
    y[i] = s / at(i, i);
  }
  for (int i = rank - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < rank; ++j) s -= at(j, i) * y[j];
    y[i] = s / at(i, i);
  }
  for (int i = 0; i < rank; ++i) x[perm[i]] = y[i];
  return rank;
}

}  // namespace regext

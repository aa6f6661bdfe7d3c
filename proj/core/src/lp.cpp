#include "regext/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace regext {

namespace {

constexpr double kInfBound = std::numeric_limits<double>::infinity();

struct Simplex {
  int m = 0, ncols = 0;  // ncols includes artificials
  Eigen::MatrixXd A;
  Eigen::VectorXd b, upper, x;
  std::vector<int> basis;
  std::vector<char> at_upper;
  std::vector<char> is_basic;

  // Returns false on iteration limit; sets unbounded when a ray is found.
  bool run(const Eigen::VectorXd& cost, int max_iter, int& iters, bool& unbounded) {
    unbounded = false;
    const double tol = 1e-9;
    int degenerate = 0;
    for (; iters < max_iter; ++iters) {
      Eigen::MatrixXd B(m, m);
      for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      Eigen::VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb[i] = cost[basis[i]];
      const Eigen::VectorXd pi = lu.transpose().solve(cb);
      const bool bland = degenerate > 50;
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < ncols; ++j) {
        if (is_basic[j] || upper[j] == 0.0) continue;
        const double d = cost[j] - pi.dot(A.col(j));
        const double gain = at_upper[j] ? -d : d;
        if (gain > tol * (1.0 + std::abs(cost[j]))) {
          if (bland) {
            enter = j;
            break;
          }
          if (gain > best) {
            best = gain;
            enter = j;
          }
        }
      }
      if (enter < 0) return true;
      const double dir = at_upper[enter] ? -1.0 : 1.0;
      const Eigen::VectorXd alpha = lu.solve(A.col(enter)) * dir;
      double step = upper[enter];
      int leave = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m; ++i) {
        const int bi = basis[i];
        if (alpha[i] > 1e-11) {
          const double s = x[bi] / alpha[i];
          if (s < step || (bland && s == step && leave >= 0 && bi < basis[leave])) {
            step = s;
            leave = i;
            leave_to_upper = false;
          }
        } else if (alpha[i] < -1e-11 && std::isfinite(upper[bi])) {
          const double s = (upper[bi] - x[bi]) / -alpha[i];
          if (s < step || (bland && s == step && leave >= 0 && bi < basis[leave])) {
            step = s;
            leave = i;
            leave_to_upper = true;
          }
        }
      }
      if (!std::isfinite(step)) {
        unbounded = true;
        return true;
      }
      step = std::max(step, 0.0);
      degenerate = step == 0.0 ? degenerate + 1 : 0;
      x[enter] += dir * step;
      for (int i = 0; i < m; ++i) x[basis[i]] -= step * alpha[i];
      if (leave < 0) {
        at_upper[enter] = !at_upper[enter];  // bound flip
        continue;
      }
      const int out = basis[leave];
      x[out] = leave_to_upper ? upper[out] : 0.0;
      at_upper[out] = leave_to_upper;
      is_basic[out] = 0;
      basis[leave] = enter;
      is_basic[enter] = 1;
      at_upper[enter] = 0;
    }
    return false;
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, int max_iterations) {
  const int m = lp.rows, n = lp.cols;
  LpSolution sol;
  Simplex sx;
  sx.m = m;
  sx.ncols = n + m;
  sx.A = Eigen::MatrixXd::Zero(m, n + m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) sx.A(i, j) = lp.a[static_cast<std::size_t>(i) * n + j];
  sx.b = Eigen::Map<const Eigen::VectorXd>(lp.b.data(), m);
  sx.upper = Eigen::VectorXd::Constant(n + m, kInfBound);
  for (int j = 0; j < n; ++j) sx.upper[j] = lp.upper.empty() ? kInfBound : lp.upper[j];
  sx.x = Eigen::VectorXd::Zero(n + m);
  sx.at_upper.assign(n + m, 0);
  sx.is_basic.assign(n + m, 0);
  sx.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double sgn = sx.b[i] < 0 ? -1.0 : 1.0;
    sx.A(i, n + i) = sgn;
    sx.x[n + i] = std::abs(sx.b[i]);
    sx.basis[i] = n + i;
    sx.is_basic[n + i] = 1;
  }

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  for (int i = 0; i < m; ++i) phase1[n + i] = -1.0;
  bool unbounded = false;
  if (!sx.run(phase1, max_iterations, sol.iterations, unbounded)) {
    sol.status = LpSolution::Status::iteration_limit;
    return sol;
  }
  const double infeas = sx.x.tail(m).sum();
  if (infeas > 1e-8 * (1.0 + sx.b.cwiseAbs().sum())) {
    sol.status = LpSolution::Status::infeasible;
    return sol;
  }
  for (int i = 0; i < m; ++i) {
    sx.upper[n + i] = 0.0;  // artificials pinned at zero from here on
    sx.x[n + i] = 0.0;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + m);
  for (int j = 0; j < n; ++j) cost[j] = lp.c[j];
  if (!sx.run(cost, max_iterations, sol.iterations, unbounded)) {
    sol.status = LpSolution::Status::iteration_limit;
    return sol;
  }
  if (unbounded) {
    sol.status = LpSolution::Status::unbounded;
    return sol;
  }
  sol.status = LpSolution::Status::optimal;
  sol.y.assign(sx.x.data(), sx.x.data() + n);
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.y[j];
  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cb(m);
  for (int i = 0; i < m; ++i) {
    B.col(i) = sx.A.col(sx.basis[i]);
    cb[i] = cost[sx.basis[i]];
  }
  const Eigen::VectorXd pi = B.transpose().partialPivLu().solve(cb);
  sol.duals.assign(pi.data(), pi.data() + m);
  return sol;
}

}  // namespace regext

#pragma once

#include <vector>

namespace regext {

/// max c^T y  s.t.  A y = b,  0 <= y <= upper  (upper may be +inf).
/// A is dense, row-major, rows x cols; rows is expected to be small.
struct LinearProgram {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> upper;
};

struct LpSolution {
  enum class Status { optimal, infeasible, unbounded, iteration_limit } status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> y;
  std::vector<double> duals;  // simplex multipliers pi = c_B B^{-1}
  int iterations = 0;
};

/// Two-phase bounded-variable primal simplex with dense basis refactorisation.
LpSolution solve_lp(const LinearProgram& lp, int max_iterations = 20000);

}  // namespace regext

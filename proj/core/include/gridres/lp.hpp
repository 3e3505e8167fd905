#pragma once

#include <vector>

namespace gridres {

/// maximize objective . x  subject to  rows, lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LpRow {
  std::vector<double> coeff;  // dense, length num_vars
  double rhs = 0.0;
  bool equality = false;      // false: coeff.x <= rhs
};

struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  int infeasible_row = -1;  // most-violated row when status == Infeasible
};

/// Deterministic bounded-variable primal simplex (two phases, Dantzig
/// pricing with lowest-index ties, Bland fallback on stalls). Reduced-cost
/// optimality tolerance 1e-9.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace gridres

#include "gridres/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridres {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kRatioTie = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ColState { Basic, AtLower, AtUpper };

struct Tableau {
  int m = 0;       // rows
  int n = 0;       // columns (structural + slack + artificial)
  int structural = 0;
  std::vector<double> t;      // m * n, current B^-1 A
  std::vector<double> beta;   // basic variable values per row
  std::vector<int> basis;     // column basic in each row
  std::vector<ColState> state;
  std::vector<double> lo, up; // column bounds
  std::vector<double> red;    // reduced-cost row for the active objective

  double& at(int r, int c) { return t[static_cast<std::size_t>(r) * n + c]; }
  const double& at(int r, int c) const { return t[static_cast<std::size_t>(r) * n + c]; }

  double value(int col) const {
    if (state[col] == ColState::AtLower) return lo[col];
    if (state[col] == ColState::AtUpper) return up[col];
    for (int r = 0; r < m; ++r) {
      if (basis[r] == col) return beta[r];
    }
    return lo[col];
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    red = cost;
    for (int r = 0; r < m; ++r) {
      const double cb = cost[basis[r]];
      if (cb == 0.0) continue;
      for (int c = 0; c < n; ++c) red[c] -= cb * at(r, c);
    }
  }

  // One simplex phase; returns false when unbounded.
  bool iterate(const std::vector<double>& cost) {
    compute_reduced_costs(cost);
    long long iter = 0;
    const long long bland_after = 1000 + 16LL * (m + n);
    const long long hard_cap = 100000 + 64LL * (m + n) * (m + n);
    while (true) {
      if (++iter > hard_cap) throw std::runtime_error("simplex: iteration limit");
      const bool bland = iter > bland_after;

      // Entering column.
      int enter = -1;
      double best_gain = kReducedCostTol;
      for (int c = 0; c < n; ++c) {
        if (state[c] == ColState::Basic) continue;
        if (up[c] - lo[c] < kPivotTol && !(up[c] == kInf)) continue;  // fixed column
        const double gain = state[c] == ColState::AtLower ? red[c] : -red[c];
        if (gain > best_gain) {
          enter = c;
          if (bland) break;
          best_gain = gain;
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      const double dir = state[enter] == ColState::AtLower ? 1.0 : -1.0;

      // Ratio test, pass 1: smallest step over basics and the bound flip.
      const double flip_cap = up[enter] == kInf ? kInf : up[enter] - lo[enter];
      auto row_cap = [&](int r, bool& to_upper) {
        const double coef = dir * at(r, enter);
        if (coef > kPivotTol) {
          to_upper = false;
          return std::max(0.0, (beta[r] - lo[basis[r]]) / coef);
        }
        if (coef < -kPivotTol && up[basis[r]] != kInf) {
          to_upper = true;
          return std::max(0.0, (up[basis[r]] - beta[r]) / (-coef));
        }
        return kInf;
      };
      double limit = flip_cap;
      for (int r = 0; r < m; ++r) {
        bool dummy = false;
        limit = std::min(limit, row_cap(r, dummy));
      }
      if (limit == kInf) return false;  // unbounded direction

      // Pass 2: among rows hitting the limit, lowest basic variable index.
      int leave_row = -1;  // stays -1 => bound flip
      bool leave_to_upper = false;
      for (int r = 0; r < m; ++r) {
        bool to_upper = false;
        const double cap = row_cap(r, to_upper);
        if (cap <= limit + kRatioTie) {
          if (leave_row < 0 || basis[r] < basis[leave_row]) {
            leave_row = r;
            leave_to_upper = to_upper;
          }
        }
      }
      if (leave_row < 0 && flip_cap > limit + kRatioTie) {
        throw std::runtime_error("simplex: ratio test inconsistency");
      }

      // Apply the move to all basic values.
      if (limit != 0.0) {
        for (int r = 0; r < m; ++r) beta[r] -= dir * limit * at(r, enter);
      }

      if (leave_row < 0) {
        // Bound flip, basis unchanged.
        state[enter] = state[enter] == ColState::AtLower ? ColState::AtUpper : ColState::AtLower;
        continue;
      }

      const int leave_col = basis[leave_row];
      const double enter_value =
          (state[enter] == ColState::AtLower ? lo[enter] : up[enter]) + dir * limit;

      // Pivot: restore identity on the entering column.
      const double pivot = at(leave_row, enter);
      if (std::abs(pivot) < kPivotTol) throw std::runtime_error("simplex: zero pivot");
      const double inv = 1.0 / pivot;
      for (int c = 0; c < n; ++c) at(leave_row, c) *= inv;
      for (int r = 0; r < m; ++r) {
        if (r == leave_row) continue;
        const double f = at(r, enter);
        if (f == 0.0) continue;
        for (int c = 0; c < n; ++c) at(r, c) -= f * at(leave_row, c);
        at(r, enter) = 0.0;
      }
      {
        const double f = red[enter];
        if (f != 0.0) {
          for (int c = 0; c < n; ++c) red[c] -= f * at(leave_row, c);
          red[enter] = 0.0;
        }
      }

      state[leave_col] = leave_to_upper ? ColState::AtUpper : ColState::AtLower;
      state[enter] = ColState::Basic;
      basis[leave_row] = enter;
      beta[leave_row] = enter_value;
    }
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const int nvars = problem.num_vars;
  const int nrows = static_cast<int>(problem.rows.size());
  assert(static_cast<int>(problem.objective.size()) == nvars);
  assert(static_cast<int>(problem.lower.size()) == nvars);
  assert(static_cast<int>(problem.upper.size()) == nvars);
  for (int j = 0; j < nvars; ++j) {
    assert(std::isfinite(problem.lower[j]));
    (void)j;
  }

  int nslack = 0;
  for (const auto& row : problem.rows) {
    if (!row.equality) ++nslack;
  }

  Tableau tab;
  tab.m = nrows;
  tab.structural = nvars;
  tab.n = nvars + nslack + nrows;  // slacks + one artificial per row
  tab.t.assign(static_cast<std::size_t>(tab.m) * tab.n, 0.0);
  tab.beta.assign(tab.m, 0.0);
  tab.basis.assign(tab.m, -1);
  tab.state.assign(tab.n, ColState::AtLower);
  tab.lo.assign(tab.n, 0.0);
  tab.up.assign(tab.n, kInf);

  for (int j = 0; j < nvars; ++j) {
    tab.lo[j] = problem.lower[j];
    tab.up[j] = problem.upper[j];
  }

  // Residuals at the all-at-lower-bound starting point decide which rows
  // need an artificial; rows with negative residual are negated so every
  // initial basic column is +1.
  int slack_next = nvars;
  const int art_base = nvars + nslack;
  bool any_artificial = false;
  for (int r = 0; r < nrows; ++r) {
    const auto& row = problem.rows[r];
    assert(static_cast<int>(row.coeff.size()) == nvars);
    double residual = row.rhs;
    for (int j = 0; j < nvars; ++j) residual -= row.coeff[j] * problem.lower[j];

    const bool negate = residual < 0.0;
    const double sign = negate ? -1.0 : 1.0;
    for (int j = 0; j < nvars; ++j) tab.at(r, j) = sign * row.coeff[j];

    int slack_col = -1;
    if (!row.equality) {
      slack_col = slack_next++;
      tab.at(r, slack_col) = sign * 1.0;
    }

    if (!row.equality && !negate) {
      // Slack starts basic and feasible.
      tab.basis[r] = slack_col;
      tab.state[slack_col] = ColState::Basic;
      tab.beta[r] = residual;
      tab.up[art_base + r] = 0.0;  // artificial never used
    } else {
      const int art = art_base + r;
      tab.at(r, art) = 1.0;
      tab.basis[r] = art;
      tab.state[art] = ColState::Basic;
      tab.beta[r] = std::abs(residual);
      any_artificial = true;
    }
  }

  LpSolution sol;

  if (any_artificial) {
    std::vector<double> phase1(tab.n, 0.0);
    for (int r = 0; r < nrows; ++r) {
      if (tab.basis[r] == art_base + r || tab.up[art_base + r] > 0.0) phase1[art_base + r] = -1.0;
    }
    if (!tab.iterate(phase1)) throw std::runtime_error("simplex: phase 1 unbounded");

    double infeas = 0.0;
    int worst_row = -1;
    for (int r = 0; r < nrows; ++r) {
      const int b = tab.basis[r];
      if (b >= art_base && tab.beta[r] > infeas) {
        infeas = tab.beta[r];
        worst_row = b - art_base;
      }
    }
    if (infeas > 1e-7) {
      sol.status = LpStatus::Infeasible;
      sol.infeasible_row = worst_row;
      return sol;
    }
    // Freeze artificials at zero for phase 2.
    for (int r = 0; r < nrows; ++r) tab.up[art_base + r] = 0.0;
  }

  std::vector<double> phase2(tab.n, 0.0);
  for (int j = 0; j < nvars; ++j) phase2[j] = problem.objective[j];
  if (!tab.iterate(phase2)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  sol.status = LpStatus::Optimal;
  sol.x.assign(nvars, 0.0);
  for (int j = 0; j < nvars; ++j) {
    double v = tab.value(j);
    v = std::max(v, problem.lower[j]);
    if (problem.upper[j] != kInf) v = std::min(v, problem.upper[j]);
    sol.x[j] = v;
  }
  sol.objective = 0.0;
  for (int j = 0; j < nvars; ++j) sol.objective += problem.objective[j] * sol.x[j];
  return sol;
}

}  // namespace gridres

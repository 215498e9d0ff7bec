// SPDX-License-Identifier: Apache-2.0
//
// Self-contained dense two-phase tableau simplex used as an independent
// reference for the production LP code. Deliberately naive: standard-form
// conversion, artificial variables for every row, Bland's rule throughout.
// Shares no code with the library.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace refsimplex {

enum class RefStatus { Optimal, Infeasible, Unbounded };

struct RefRow {
  std::vector<std::pair<int, double>> coeffs;
  int sense = 0;  // -1: <=, 0: ==, +1: >=
  double rhs = 0.0;
};

struct RefProblem {
  std::vector<double> lower, upper, cost;  // per variable; +-inf allowed
  std::vector<RefRow> rows;
};

struct RefResult {
  RefStatus status = RefStatus::Infeasible;
  double objective = 0.0;
};

inline RefResult solve_reference(const RefProblem& prob) {
  constexpr double kTol = 1e-9;
  const double inf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(prob.lower.size());

  // Map every original variable onto nonnegative ones:
  //   finite lower: x = lo + u            (plus a row u <= hi - lo if needed)
  //   upper only:   x = hi - u
  //   free:         x = p - q
  struct VarMap {
    int pos = -1, neg = -1;
    double shift = 0.0, sign = 1.0;
  };
  std::vector<VarMap> map(n);
  int ncols = 0;
  std::vector<double> col_cost;
  std::vector<RefRow> rows = prob.rows;
  double fixed_cost = 0.0;

  for (int v = 0; v < n; ++v) {
    const double lo = prob.lower[v], hi = prob.upper[v];
    if (std::isfinite(lo)) {
      map[v].pos = ncols++;
      map[v].shift = lo;
      map[v].sign = 1.0;
      col_cost.push_back(prob.cost[v]);
      fixed_cost += prob.cost[v] * lo;
      if (std::isfinite(hi)) {
        RefRow r;
        r.coeffs = {{-(v + 1), 0.0}};  // placeholder, resolved below
        r.sense = -1;
        r.rhs = hi - lo;
        rows.push_back(r);
      }
    } else if (std::isfinite(hi)) {
      map[v].pos = ncols++;
      map[v].shift = hi;
      map[v].sign = -1.0;
      col_cost.push_back(-prob.cost[v]);
      fixed_cost += prob.cost[v] * hi;
    } else {
      map[v].pos = ncols++;
      col_cost.push_back(prob.cost[v]);
      map[v].neg = ncols++;
      col_cost.push_back(-prob.cost[v]);
    }
  }

  // Dense equality system over the mapped variables.
  const int m = static_cast<int>(rows.size());
  std::vector<std::vector<double>> a(m, std::vector<double>(ncols, 0.0));
  std::vector<double> rhs(m, 0.0);
  std::vector<int> sense(m, 0);
  for (int i = 0; i < m; ++i) {
    double shift_sum = 0.0;
    for (const auto& [var, coef] : rows[i].coeffs) {
      if (var < 0) {  // bound row marker: variable -(var+1), coefficient 1
        const int v = -(var + 1);
        a[i][map[v].pos] += 1.0;
        continue;
      }
      shift_sum += coef * map[var].shift;
      a[i][map[var].pos] += coef * map[var].sign;
      if (map[var].neg >= 0) a[i][map[var].neg] -= coef;
    }
    rhs[i] = rows[i].rhs - shift_sum;
    sense[i] = rows[i].sense;
  }

  // Slacks, then sign-normalize, then artificials.
  for (int i = 0; i < m; ++i) {
    if (sense[i] != 0) {
      for (auto& row : a) row.push_back(0.0);
      a[i][ncols] = sense[i] < 0 ? 1.0 : -1.0;
      col_cost.push_back(0.0);
      ++ncols;
    }
  }
  for (int i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      rhs[i] = -rhs[i];
      for (int j = 0; j < ncols; ++j) a[i][j] = -a[i][j];
    }
  }
  std::vector<int> basis(m);
  const int art0 = ncols;
  for (int i = 0; i < m; ++i) {
    for (auto& row : a) row.push_back(0.0);
    a[i][ncols] = 1.0;
    col_cost.push_back(0.0);
    basis[i] = ncols;
    ++ncols;
  }

  std::vector<double> x(ncols, 0.0);
  auto pivot = [&](int row, int col) {
    const double p = a[row][col];
    for (int j = 0; j < ncols; ++j) a[row][j] /= p;
    rhs[row] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = a[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols; ++j) a[i][j] -= f * a[row][j];
      rhs[i] -= f * rhs[row];
    }
    basis[row] = col;
  };

  auto run_phase = [&](const std::vector<double>& phase_cost,
                       int entering_limit) -> RefStatus {
    while (true) {
      // Reduced costs d_j = c_j - c_B . B^-1 a_j from the current tableau.
      std::vector<double> d(entering_limit);
      for (int j = 0; j < entering_limit; ++j) {
        double acc = phase_cost[j];
        for (int i = 0; i < m; ++i) acc -= phase_cost[basis[i]] * a[i][j];
        d[j] = acc;
      }
      int entering = -1;
      for (int j = 0; j < entering_limit; ++j) {
        if (d[j] < -kTol) {
          entering = j;  // Bland: lowest index
          break;
        }
      }
      if (entering < 0) return RefStatus::Optimal;
      int leaving = -1;
      double best = inf;
      for (int i = 0; i < m; ++i) {
        if (a[i][entering] > kTol) {
          const double ratio = rhs[i] / a[i][entering];
          if (ratio < best - kTol ||
              (ratio < best + kTol &&
               (leaving < 0 || basis[i] < basis[leaving]))) {
            best = ratio;
            leaving = i;
          }
        }
      }
      if (leaving < 0) return RefStatus::Unbounded;
      pivot(leaving, entering);
    }
  };

  // Phase 1: drive the artificials to zero.
  std::vector<double> phase1(ncols, 0.0);
  for (int j = art0; j < ncols; ++j) phase1[j] = 1.0;
  if (run_phase(phase1, ncols) == RefStatus::Unbounded)
    return {RefStatus::Infeasible, 0.0};
  double art_sum = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= art0) art_sum += rhs[i];
  if (art_sum > 1e-7) return {RefStatus::Infeasible, 0.0};

  // Pivot leftover (degenerate) artificials out where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(a[i][j]) > 1e-7) {
        pivot(i, j);
        break;
      }
    }
  }

  const RefStatus phase2 = run_phase(col_cost, art0);
  if (phase2 == RefStatus::Unbounded) return {RefStatus::Unbounded, 0.0};

  double obj = fixed_cost;
  for (int i = 0; i < m; ++i)
    if (basis[i] < art0) obj += col_cost[basis[i]] * rhs[i];
  return {RefStatus::Optimal, obj};
}

}  // namespace refsimplex

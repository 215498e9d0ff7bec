// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace cmbeam::lp {

enum class Sense : std::uint8_t { LessEqual, GreaterEqual, Equal };

enum class Status : std::uint8_t { Optimal, Infeasible, IterationLimit };

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeNonbasic };

struct RowDef {
  std::vector<std::pair<int, double>> coeffs;  // (structural variable, value)
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct Solution {
  Eigen::VectorXd values;  // structural variables
  double objective = 0.0;
  Status status = Status::IterationLimit;
  int iterations = 0;
};

/// Variable statuses for structural variables followed by one logical
/// (slack) per row, in row order. A basis is valid for a model when sizes
/// match and the number of Basic entries equals the row count.
struct Basis {
  std::vector<VarStatus> status;
  bool empty() const { return status.empty(); }
};

struct Settings {
  double feas_tol = 1e-7;   // primal feasibility tolerance
  double opt_tol = 1e-7;    // dual feasibility tolerance
  double pivot_tol = 1e-9;  // smallest acceptable pivot element
  int bland_after = 5000;   // degenerate pivots before switching to Bland's rule
  int max_iterations = 50000;
  int refactor_every = 300;
};

/// Dense bounded-variable simplex (primal and dual pivoting) for the small
/// LPs arising here: a few hundred variables and rows. Supports incremental
/// row addition, bound changes and warm-started re-solves. Minimization.
class Model {
 public:
  explicit Model(Settings settings = {});

  int add_variable(double lower, double upper, double objective);
  void set_bounds(int var, double lower, double upper);
  void set_objective_coeff(int var, double value);

  int add_row(RowDef row);
  std::vector<int> add_rows(std::vector<RowDef> rows);
  /// Drops all rows from index `count` on. Invalidates the resident basis
  /// unless every dropped row's logical was basic.
  void truncate_rows(int count);
  /// Removes the given rows (sorted ascending). Rows whose logical is
  /// nonbasic invalidate the resident basis.
  void remove_rows(const std::vector<int>& rows);

  int num_variables() const { return num_structural_; }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  double lower_bound(int var) const { return lower_[var]; }
  double upper_bound(int var) const { return upper_[var]; }
  const RowDef& row(int i) const { return rows_[i]; }

  /// Solves from the resident basis (cold start when none is valid).
  Solution solve();
  /// Solves from an explicit starting basis.
  Solution solve(const Basis& warm);

  Basis basis() const;
  void clear_basis();

  /// Left-hand-side value of row i at a solution.
  double row_activity(const Solution& sol, int i) const;

 private:
  struct EngineResult {
    Status status;
    int iterations;
  };

  int total_vars() const { return num_structural_ + num_rows(); }
  double logical_lower(int row) const;
  double logical_upper(int row) const;
  double var_lower(int var) const;
  double var_upper(int var) const;
  double var_cost(int var) const;
  double nonbasic_value(int var) const;
  void column(int var, Eigen::VectorXd& out) const;

  void reset_to_slack_basis();
  bool basis_counts_ok() const;
  bool refactorize();
  void append_row_to_factor(int row_index);
  void recompute_primal();
  void recompute_duals();
  void pivot(int entering, int leaving_slot, const Eigen::VectorXd& ftran_col,
             const Eigen::VectorXd& alpha, double entering_step,
             VarStatus leaving_status);

  double primal_infeasibility() const;
  double dual_infeasibility() const;

  // One dual simplex iteration. phase1 uses zero costs (pure feasibility
  // search). Returns true when a pivot or flip was performed; fills
  // *done_status when finished (optimal-primal-feasible or infeasible).
  bool dual_iteration(bool phase1, Status* done_status);
  bool primal_iteration(Status* done_status);

  Settings settings_;

  int num_structural_ = 0;
  std::vector<double> lower_, upper_, cost_;  // structural data
  std::vector<RowDef> rows_;
  std::vector<std::vector<std::pair<int, double>>> columns_;  // row index, coef

  // Engine state.
  std::vector<VarStatus> vstat_;
  std::vector<int> basic_;         // variable occupying each basis slot
  std::vector<int> basis_slot_;    // variable -> slot or -1
  Eigen::MatrixXd binv_;
  Eigen::VectorXd x_basic_;
  Eigen::VectorXd reduced_cost_;
  bool factor_valid_ = false;
  bool primal_valid_ = false;
  bool duals_valid_ = false;
  int pivots_since_refactor_ = 0;
  int degenerate_streak_ = 0;
};

}  // namespace cmbeam::lp

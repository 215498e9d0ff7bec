// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmbeam::lp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenStep = 1e-12;
constexpr double kRatioTie = 1e-12;
}  // namespace

Model::Model(Settings settings) : settings_(settings) {}

int Model::add_variable(double lower, double upper, double objective) {
  if (!rows_.empty())
    throw std::logic_error("variables must be added before rows");
  if (lower > upper)
    throw std::invalid_argument("variable bounds cross (lower > upper)");
  if (!std::isfinite(objective))
    throw std::invalid_argument("objective coefficient must be finite");
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(objective);
  columns_.emplace_back();
  factor_valid_ = false;
  return num_structural_++;
}

void Model::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= num_structural_)
    throw std::invalid_argument("unknown variable id");
  if (lower > upper)
    throw std::invalid_argument("variable bounds cross (lower > upper)");
  lower_[var] = lower;
  upper_[var] = upper;
  primal_valid_ = false;
}

void Model::set_objective_coeff(int var, double value) {
  if (var < 0 || var >= num_structural_)
    throw std::invalid_argument("unknown variable id");
  if (!std::isfinite(value))
    throw std::invalid_argument("objective coefficient must be finite");
  cost_[var] = value;
  duals_valid_ = false;
}

int Model::add_row(RowDef row) {
  for (const auto& [var, coef] : row.coeffs) {
    if (var < 0 || var >= num_structural_)
      throw std::invalid_argument("unknown variable id in row");
    if (!std::isfinite(coef))
      throw std::invalid_argument("row coefficient must be finite");
  }
  if (!std::isfinite(row.rhs)) throw std::invalid_argument("row rhs must be finite");

  const int index = static_cast<int>(rows_.size());
  for (const auto& [var, coef] : row.coeffs) columns_[var].emplace_back(index, coef);
  rows_.push_back(std::move(row));

  if (static_cast<int>(vstat_.size()) == num_structural_ + index) {
    vstat_.push_back(VarStatus::Basic);
    if (factor_valid_) {
      // Keep the factorization: the new logical enters the basis, so the
      // basis matrix gains one row plus an identity column.
      append_row_to_factor(index);
    }
  } else {
    factor_valid_ = false;
  }
  return index;
}

std::vector<int> Model::add_rows(std::vector<RowDef> rows) {
  std::vector<int> ids;
  ids.reserve(rows.size());
  for (auto& r : rows) ids.push_back(add_row(std::move(r)));
  return ids;
}

void Model::truncate_rows(int count) {
  if (count < 0 || count > num_rows())
    throw std::invalid_argument("truncate count out of range");
  if (count == num_rows()) return;
  rows_.resize(count);
  for (auto& col : columns_) {
    col.erase(std::remove_if(col.begin(), col.end(),
                             [&](const auto& e) { return e.first >= count; }),
              col.end());
  }
  if (static_cast<int>(vstat_.size()) > num_structural_ + count)
    vstat_.resize(num_structural_ + count);
  factor_valid_ = false;
}

void Model::remove_rows(const std::vector<int>& rows) {
  if (rows.empty()) return;
  std::vector<char> drop(num_rows(), 0);
  for (int r : rows) {
    if (r < 0 || r >= num_rows()) throw std::invalid_argument("unknown row id");
    drop[r] = 1;
  }
  std::vector<RowDef> kept;
  std::vector<VarStatus> kept_stat;
  const bool have_stat = static_cast<int>(vstat_.size()) == total_vars();
  kept.reserve(rows_.size());
  for (int i = 0; i < num_rows(); ++i) {
    if (!drop[i]) {
      kept.push_back(std::move(rows_[i]));
      if (have_stat) kept_stat.push_back(vstat_[num_structural_ + i]);
    }
  }
  rows_ = std::move(kept);
  for (auto& col : columns_) col.clear();
  for (int i = 0; i < num_rows(); ++i)
    for (const auto& [var, coef] : rows_[i].coeffs) columns_[var].emplace_back(i, coef);
  if (have_stat) {
    vstat_.resize(num_structural_);
    vstat_.insert(vstat_.end(), kept_stat.begin(), kept_stat.end());
  } else {
    vstat_.clear();
  }
  factor_valid_ = false;
}

double Model::logical_lower(int row) const {
  return rows_[row].sense == Sense::GreaterEqual ? -kInf : 0.0;
}

double Model::logical_upper(int row) const {
  return rows_[row].sense == Sense::LessEqual ? kInf : 0.0;
}

double Model::var_lower(int var) const {
  return var < num_structural_ ? lower_[var] : logical_lower(var - num_structural_);
}

double Model::var_upper(int var) const {
  return var < num_structural_ ? upper_[var] : logical_upper(var - num_structural_);
}

double Model::var_cost(int var) const {
  return var < num_structural_ ? cost_[var] : 0.0;
}

double Model::nonbasic_value(int var) const {
  switch (vstat_[var]) {
    case VarStatus::AtLower: return var_lower(var);
    case VarStatus::AtUpper: return var_upper(var);
    case VarStatus::FreeNonbasic: return 0.0;
    case VarStatus::Basic: break;
  }
  return 0.0;
}

void Model::column(int var, Eigen::VectorXd& out) const {
  out.setZero(num_rows());
  if (var < num_structural_) {
    for (const auto& [row, coef] : columns_[var]) out(row) += coef;
  } else {
    out(var - num_structural_) = 1.0;
  }
}

void Model::reset_to_slack_basis() {
  const int nt = total_vars();
  vstat_.assign(nt, VarStatus::AtLower);
  for (int v = 0; v < num_structural_; ++v) {
    const bool lo_fin = std::isfinite(lower_[v]);
    const bool hi_fin = std::isfinite(upper_[v]);
    if (lo_fin && hi_fin) {
      vstat_[v] = (cost_[v] < 0.0) ? VarStatus::AtUpper : VarStatus::AtLower;
    } else if (lo_fin) {
      vstat_[v] = VarStatus::AtLower;
    } else if (hi_fin) {
      vstat_[v] = VarStatus::AtUpper;
    } else {
      vstat_[v] = VarStatus::FreeNonbasic;
    }
  }
  const int m = num_rows();
  for (int i = 0; i < m; ++i) vstat_[num_structural_ + i] = VarStatus::Basic;
  refactorize();
}

bool Model::basis_counts_ok() const {
  if (static_cast<int>(vstat_.size()) != total_vars()) return false;
  int basics = 0;
  for (VarStatus s : vstat_) basics += (s == VarStatus::Basic) ? 1 : 0;
  return basics == num_rows();
}

bool Model::refactorize() {
  const int m = num_rows();
  basic_.clear();
  basic_.reserve(m);
  basis_slot_.assign(total_vars(), -1);
  for (int v = 0; v < total_vars(); ++v) {
    if (vstat_[v] == VarStatus::Basic) {
      basis_slot_[v] = static_cast<int>(basic_.size());
      basic_.push_back(v);
    }
  }
  if (static_cast<int>(basic_.size()) != m) return false;

  if (m == 0) {
    binv_.resize(0, 0);
  } else {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd col(m);
    for (int i = 0; i < m; ++i) {
      column(basic_[i], col);
      b.col(i) = col;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    if (!(lu.rcond() > 1e-14)) return false;
    binv_ = lu.inverse();
  }
  factor_valid_ = true;
  primal_valid_ = false;
  duals_valid_ = false;
  pivots_since_refactor_ = 0;
  return true;
}

void Model::append_row_to_factor(int row_index) {
  const int m = row_index;  // rows before this one
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(m + 1, m + 1);
  grown.topLeftCorner(m, m) = binv_;
  Eigen::RowVectorXd tail = Eigen::RowVectorXd::Zero(m);
  for (const auto& [var, coef] : rows_[row_index].coeffs) {
    const int slot = var < static_cast<int>(basis_slot_.size()) ? basis_slot_[var] : -1;
    if (slot >= 0) tail -= coef * binv_.row(slot);
  }
  grown.block(m, 0, 1, m) = tail;
  grown(m, m) = 1.0;
  binv_ = std::move(grown);

  basic_.push_back(num_structural_ + row_index);
  basis_slot_.resize(total_vars(), -1);
  basis_slot_[num_structural_ + row_index] = m;
  if (duals_valid_) {
    reduced_cost_.conservativeResize(total_vars());
    reduced_cost_(total_vars() - 1) = 0.0;
  }
  primal_valid_ = false;
}

void Model::recompute_primal() {
  const int m = num_rows();
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i) r(i) = rows_[i].rhs;
  for (int v = 0; v < total_vars(); ++v) {
    if (vstat_[v] == VarStatus::Basic) continue;
    const double val = nonbasic_value(v);
    if (val == 0.0) continue;
    if (v < num_structural_) {
      for (const auto& [row, coef] : columns_[v]) r(row) -= coef * val;
    } else {
      r(v - num_structural_) -= val;
    }
  }
  x_basic_ = binv_ * r;
  primal_valid_ = true;
}

void Model::recompute_duals() {
  const int m = num_rows();
  Eigen::VectorXd cb(m);
  for (int i = 0; i < m; ++i) cb(i) = var_cost(basic_[i]);
  const Eigen::VectorXd y = binv_.transpose() * cb;
  reduced_cost_.setZero(total_vars());
  for (int v = 0; v < num_structural_; ++v) reduced_cost_(v) = cost_[v];
  for (int i = 0; i < m; ++i) {
    const double yi = y(i);
    if (yi == 0.0) continue;
    for (const auto& [var, coef] : rows_[i].coeffs) reduced_cost_(var) -= yi * coef;
    reduced_cost_(num_structural_ + i) -= yi;
  }
  for (int v : basic_) reduced_cost_(v) = 0.0;
  duals_valid_ = true;
}

double Model::primal_infeasibility() const {
  double worst = 0.0;
  for (int i = 0; i < num_rows(); ++i) {
    const int v = basic_[i];
    const double x = x_basic_(i);
    worst = std::max(worst, var_lower(v) - x);
    worst = std::max(worst, x - var_upper(v));
  }
  return worst;
}

double Model::dual_infeasibility() const {
  double worst = 0.0;
  for (int v = 0; v < total_vars(); ++v) {
    if (var_lower(v) == var_upper(v)) continue;  // fixed: any sign is fine
    const double d = reduced_cost_(v);
    switch (vstat_[v]) {
      case VarStatus::AtLower: worst = std::max(worst, -d); break;
      case VarStatus::AtUpper: worst = std::max(worst, d); break;
      case VarStatus::FreeNonbasic: worst = std::max(worst, std::abs(d)); break;
      case VarStatus::Basic: break;
    }
  }
  return worst;
}

void Model::pivot(int entering, int leaving_slot, const Eigen::VectorXd& ftran_col,
                  const Eigen::VectorXd& alpha, double entering_step,
                  VarStatus leaving_status) {
  const int leaving_var = basic_[leaving_slot];
  const double pivot_elem = ftran_col(leaving_slot);
  const double entering_value = nonbasic_value(entering) + entering_step;

  // Reduced costs first: the update needs the pre-pivot entering cost.
  const double beta = reduced_cost_(entering) / pivot_elem;
  if (beta != 0.0) reduced_cost_ -= beta * alpha;

  x_basic_ -= entering_step * ftran_col;
  x_basic_(leaving_slot) = entering_value;

  // Product-form update of the basis inverse.
  binv_.row(leaving_slot) /= pivot_elem;
  for (int i = 0; i < binv_.rows(); ++i) {
    if (i == leaving_slot) continue;
    const double f = ftran_col(i);
    if (f != 0.0) binv_.row(i) -= f * binv_.row(leaving_slot);
  }

  basic_[leaving_slot] = entering;
  basis_slot_[entering] = leaving_slot;
  basis_slot_[leaving_var] = -1;
  vstat_[entering] = VarStatus::Basic;
  vstat_[leaving_var] = leaving_status;
  reduced_cost_(entering) = 0.0;
  ++pivots_since_refactor_;
}

bool Model::dual_iteration(bool phase1, Status* done_status) {
  const int m = num_rows();
  const double ftol = settings_.feas_tol;
  const bool bland = degenerate_streak_ > settings_.bland_after;

  // Leaving variable: most violated basic bound (Bland: lowest id).
  int leaving_slot = -1;
  bool to_lower = false;
  double worst = ftol;
  for (int i = 0; i < m; ++i) {
    const int v = basic_[i];
    const double x = x_basic_(i);
    const double below = var_lower(v) - x;
    const double above = x - var_upper(v);
    const double viol = std::max(below, above);
    if (viol <= ftol) continue;
    if (bland) {
      if (leaving_slot == -1 || v < basic_[leaving_slot]) {
        leaving_slot = i;
        to_lower = below >= above;
      }
    } else if (viol > worst) {
      worst = viol;
      leaving_slot = i;
      to_lower = below >= above;
    }
  }
  if (leaving_slot < 0) {
    *done_status = Status::Optimal;  // primal feasible
    return false;
  }

  // alpha = (B^-1 row of the leaving slot) * column, for every variable.
  const Eigen::RowVectorXd rho = binv_.row(leaving_slot);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(total_vars());
  for (int v = 0; v < num_structural_; ++v) {
    double a = 0.0;
    for (const auto& [row, coef] : columns_[v]) a += rho(row) * coef;
    alpha(v) = a;
  }
  for (int i = 0; i < m; ++i) alpha(num_structural_ + i) = rho(i);

  // Dual ratio test; flipping the row sign folds the two violation cases.
  const double flip = to_lower ? -1.0 : 1.0;
  const double ptol = settings_.pivot_tol;
  int entering = -1;
  double best_ratio = kInf;
  double best_alpha = 0.0;
  for (int v = 0; v < total_vars(); ++v) {
    const VarStatus s = vstat_[v];
    if (s == VarStatus::Basic) continue;
    if (var_lower(v) == var_upper(v)) continue;  // fixed: cannot move
    const double a = flip * alpha(v);
    bool eligible = false;
    double ratio = kInf;
    if ((s == VarStatus::AtLower || s == VarStatus::FreeNonbasic) && a > ptol) {
      eligible = true;
      ratio = phase1 ? 0.0 : std::max(0.0, reduced_cost_(v)) / a;
    } else if ((s == VarStatus::AtUpper || s == VarStatus::FreeNonbasic) && a < -ptol) {
      eligible = true;
      ratio = phase1 ? 0.0 : std::min(0.0, reduced_cost_(v)) / a;
    }
    if (!eligible) continue;
    bool better = false;
    if (entering == -1) {
      better = true;
    } else if (ratio < best_ratio - kRatioTie) {
      better = true;
    } else if (ratio <= best_ratio + kRatioTie) {
      better = bland ? (v < entering) : (std::abs(a) > std::abs(best_alpha));
    }
    if (better) {
      entering = v;
      best_ratio = ratio;
      best_alpha = a;
    }
  }
  if (entering < 0) {
    *done_status = Status::Infeasible;  // no column can repair the violation
    return false;
  }

  Eigen::VectorXd w(m);
  column(entering, w);
  w = binv_ * w;
  const double pivot_elem = w(leaving_slot);
  if (std::abs(pivot_elem) < ptol ||
      std::abs(pivot_elem - alpha(entering)) >
          1e-6 * (1.0 + std::abs(alpha(entering)))) {
    // Stale factorization; rebuild and let the caller retry.
    if (!refactorize()) reset_to_slack_basis();
    recompute_primal();
    recompute_duals();
    return true;
  }

  const int leaving_var = basic_[leaving_slot];
  const double target = to_lower ? var_lower(leaving_var) : var_upper(leaving_var);
  const double step = (x_basic_(leaving_slot) - target) / pivot_elem;
  const double d_entering = phase1 ? 0.0 : reduced_cost_(entering);
  if (std::abs(d_entering) <= kDegenStep)
    ++degenerate_streak_;
  else
    degenerate_streak_ = 0;

  pivot(entering, leaving_slot, w, alpha, step,
        to_lower ? VarStatus::AtLower : VarStatus::AtUpper);
  return true;
}

bool Model::primal_iteration(Status* done_status) {
  const int m = num_rows();
  const double otol = settings_.opt_tol;
  const bool bland = degenerate_streak_ > settings_.bland_after;

  int entering = -1;
  double direction = 1.0;
  double worst = otol;
  for (int v = 0; v < total_vars(); ++v) {
    const VarStatus s = vstat_[v];
    if (s == VarStatus::Basic) continue;
    if (var_lower(v) == var_upper(v)) continue;
    const double d = reduced_cost_(v);
    double viol;
    double dir;
    if ((s == VarStatus::AtLower || s == VarStatus::FreeNonbasic) && d < -otol) {
      viol = -d;
      dir = 1.0;
    } else if ((s == VarStatus::AtUpper || s == VarStatus::FreeNonbasic) && d > otol) {
      viol = d;
      dir = -1.0;
    } else {
      continue;
    }
    if (bland) {
      if (entering == -1 || v < entering) {
        entering = v;
        direction = dir;
      }
    } else if (viol > worst) {
      worst = viol;
      entering = v;
      direction = dir;
    }
  }
  if (entering < 0) {
    *done_status = Status::Optimal;  // dual feasible
    return false;
  }

  Eigen::VectorXd w(m);
  column(entering, w);
  w = binv_ * w;

  const double ptol = settings_.pivot_tol;
  double best_t = kInf;
  int leaving_slot = -1;
  bool leaving_to_lower = false;
  double best_drop = 0.0;
  const double range = var_upper(entering) - var_lower(entering);
  if (std::isfinite(range)) best_t = range;  // self bound flip

  for (int i = 0; i < m; ++i) {
    const int v = basic_[i];
    const double drop = direction * w(i);  // x_basic(i) moves by -t * drop
    double t;
    bool to_lower;
    if (drop > ptol) {
      const double lo = var_lower(v);
      if (!std::isfinite(lo)) continue;
      t = (x_basic_(i) - lo) / drop;
      to_lower = true;
    } else if (drop < -ptol) {
      const double hi = var_upper(v);
      if (!std::isfinite(hi)) continue;
      t = (x_basic_(i) - hi) / drop;
      to_lower = false;
    } else {
      continue;
    }
    t = std::max(t, 0.0);
    bool better = false;
    if (t < best_t - kRatioTie) {
      better = true;
    } else if (t <= best_t + kRatioTie && leaving_slot >= 0) {
      better = bland ? (v < basic_[leaving_slot]) : (std::abs(drop) > std::abs(best_drop));
    }
    if (better) {
      best_t = t;
      leaving_slot = i;
      leaving_to_lower = to_lower;
      best_drop = drop;
    }
  }

  if (!std::isfinite(best_t))
    throw std::runtime_error("LP objective is unbounded below on the feasible region");

  if (best_t <= kDegenStep)
    ++degenerate_streak_;
  else
    degenerate_streak_ = 0;

  if (leaving_slot < 0) {
    // The entering variable hits its own other bound: a bound flip.
    x_basic_ -= (direction * best_t) * w;
    vstat_[entering] = (vstat_[entering] == VarStatus::AtLower) ? VarStatus::AtUpper
                                                                : VarStatus::AtLower;
    return true;
  }

  const double pivot_elem = w(leaving_slot);
  if (std::abs(pivot_elem) < ptol) {
    if (!refactorize()) reset_to_slack_basis();
    recompute_primal();
    recompute_duals();
    return true;
  }

  const Eigen::RowVectorXd rho = binv_.row(leaving_slot);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(total_vars());
  for (int v = 0; v < num_structural_; ++v) {
    double a = 0.0;
    for (const auto& [row, coef] : columns_[v]) a += rho(row) * coef;
    alpha(v) = a;
  }
  for (int i = 0; i < m; ++i) alpha(num_structural_ + i) = rho(i);

  pivot(entering, leaving_slot, w, alpha, direction * best_t,
        leaving_to_lower ? VarStatus::AtLower : VarStatus::AtUpper);
  return true;
}

Solution Model::solve(const Basis& warm) {
  if (static_cast<int>(warm.status.size()) == total_vars()) {
    vstat_ = warm.status;
    factor_valid_ = false;
  }
  return solve();
}

Solution Model::solve() {
  Solution sol;
  sol.values.setZero(num_structural_);

  if (!basis_counts_ok()) {
    reset_to_slack_basis();
  } else {
    // Nonbasic statuses must point at finite bounds.
    for (int v = 0; v < total_vars(); ++v) {
      switch (vstat_[v]) {
        case VarStatus::AtLower:
          if (!std::isfinite(var_lower(v)))
            vstat_[v] = std::isfinite(var_upper(v)) ? VarStatus::AtUpper
                                                    : VarStatus::FreeNonbasic;
          break;
        case VarStatus::AtUpper:
          if (!std::isfinite(var_upper(v)))
            vstat_[v] = std::isfinite(var_lower(v)) ? VarStatus::AtLower
                                                    : VarStatus::FreeNonbasic;
          break;
        default:
          break;
      }
    }
  }
  if (!factor_valid_ && !refactorize()) reset_to_slack_basis();
  if (!primal_valid_) recompute_primal();
  if (!duals_valid_) recompute_duals();

  degenerate_streak_ = 0;
  int iterations = 0;
  int stall_count = 0;
  Status finished = Status::IterationLimit;

  while (true) {
    if (iterations++ > settings_.max_iterations) break;
    if (pivots_since_refactor_ >= settings_.refactor_every) {
      if (!refactorize()) reset_to_slack_basis();
      recompute_primal();
      recompute_duals();
    }

    const double pinf = primal_infeasibility();
    const double dinf = dual_infeasibility();
    if (pinf <= settings_.feas_tol && dinf <= settings_.opt_tol) {
      if (pivots_since_refactor_ > 0) {
        // Re-derive everything fresh before trusting the optimum.
        refactorize();
        recompute_primal();
        recompute_duals();
        if (primal_infeasibility() > settings_.feas_tol ||
            dual_infeasibility() > settings_.opt_tol) {
          if (++stall_count > 5) break;
          continue;
        }
      }
      finished = Status::Optimal;
      break;
    }

    Status stepped = Status::IterationLimit;
    bool moved;
    if (dinf <= settings_.opt_tol) {
      moved = dual_iteration(false, &stepped);
    } else if (pinf <= settings_.feas_tol) {
      moved = primal_iteration(&stepped);
    } else {
      moved = dual_iteration(true, &stepped);  // feasibility search
    }
    if (!moved) {
      if (stepped == Status::Infeasible) {
        finished = Status::Infeasible;
        break;
      }
      // The engine sees no work though the outer test disagrees: the point
      // straddles a tolerance boundary. Refresh and retry a few times.
      if (!refactorize()) reset_to_slack_basis();
      recompute_primal();
      recompute_duals();
      if (++stall_count > 5) break;
    }
  }

  sol.status = finished;
  sol.iterations = iterations;
  for (int v = 0; v < num_structural_; ++v) {
    double value = (vstat_[v] == VarStatus::Basic) ? x_basic_(basis_slot_[v])
                                                   : nonbasic_value(v);
    sol.values(v) = std::min(std::max(value, lower_[v]), upper_[v]);
  }
  double obj = 0.0;
  for (int v = 0; v < num_structural_; ++v) obj += cost_[v] * sol.values(v);
  sol.objective = obj;
  return sol;
}

Basis Model::basis() const {
  Basis b;
  if (static_cast<int>(vstat_.size()) == total_vars()) b.status = vstat_;
  return b;
}

void Model::clear_basis() {
  vstat_.clear();
  factor_valid_ = false;
}

double Model::row_activity(const Solution& sol, int i) const {
  double act = 0.0;
  for (const auto& [var, coef] : rows_[i].coeffs) act += coef * sol.values(var);
  return act;
}

}  // namespace cmbeam::lp

// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmbeam::bnb {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kBoundEps = 1e-9;  // integral-objective rounding slack

double ceil_bound(double value) { return std::ceil(value - kBoundEps); }

}  // namespace

std::optional<int> select_fractional(const Eigen::VectorXd& b, double tol) {
  int best = -1;
  double best_dist = tol;
  for (int n = 0; n < b.size(); ++n) {
    const double dist = std::abs(b(n) - std::round(b(n)));
    if (dist > best_dist) {
      best_dist = dist;
      best = n;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

bool Solver::NodeCmp::operator()(const std::shared_ptr<Node>& a,
                                 const std::shared_ptr<Node>& b) const {
  if (a->bound != b->bound) return a->bound > b->bound;  // smaller bound first
  if (a->depth != b->depth) return a->depth < b->depth;  // then deeper
  return a->seq > b->seq;                                // then FIFO
}

Solver::Solver(const ProblemInstance& inst, SolveConfig config)
    : inst_(inst), config_(config) {
  validate(inst_);
  real_ = to_real(inst_);
  layout_ = relaxation::build_root(real_, model_);
  start_ = std::chrono::steady_clock::now();

  if (config_.initial_solution) {
    if (!is_feasible(inst_, *config_.initial_solution, config_.eps))
      throw std::invalid_argument("initial solution is not feasible");
    incumbent_ = *config_.initial_solution;
    incumbent_card_ = incumbent_->cardinality();
  }

  auto root = std::make_shared<Node>();
  root->seq = next_seq_++;
  const int nv = layout_.num_structural();
  root->lower.resize(nv);
  root->upper.resize(nv);
  for (int v = 0; v < nv; ++v) {
    root->lower(v) = model_.lower_bound(v);
    root->upper(v) = model_.upper_bound(v);
  }
  root->orthant.assign(layout_.n_antennas, modulus::Orthant::Unassigned);
  push_node(std::move(root));
}

double Solver::elapsed_s() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
      .count();
}

bool Solver::finished() const { return frontier_.empty(); }

double Solver::dual_bound() const {
  double bound = std::numeric_limits<double>::infinity();
  if (!frontier_.empty()) bound = ceil_bound(frontier_.front()->bound);
  if (incumbent_) bound = std::min(bound, static_cast<double>(incumbent_card_));
  return bound;
}

int Solver::incumbent_cardinality() const { return incumbent_ ? incumbent_card_ : -1; }

const std::optional<CandidateSolution>& Solver::incumbent() const { return incumbent_; }

void Solver::push_node(std::shared_ptr<Node> node) {
  frontier_.push_back(std::move(node));
  std::push_heap(frontier_.begin(), frontier_.end(), NodeCmp{});
}

std::shared_ptr<Node> Solver::clone_child(const Node& parent, double bound) {
  auto child = std::make_shared<Node>(parent);
  child->seq = next_seq_++;
  child->depth = parent.depth + 1;
  child->bound = bound;
  child->visited = false;
  child->separation_rounds = 0;
  return child;
}

modulus::AntennaBox Solver::box_of(const Node& node, int antenna) const {
  modulus::AntennaBox box;
  box.orthant = node.orthant[antenna];
  box.w_lo = node.lower(layout_.w(antenna));
  box.w_hi = node.upper(layout_.w(antenna));
  box.z_lo = node.lower(layout_.z(antenna));
  box.z_hi = node.upper(layout_.z(antenna));
  return box;
}

void Solver::apply_box(Node& node, int antenna, const modulus::AntennaBox& box) {
  node.orthant[antenna] = box.orthant;
  node.lower(layout_.w(antenna)) = box.w_lo;
  node.upper(layout_.w(antenna)) = box.w_hi;
  node.lower(layout_.z(antenna)) = box.z_lo;
  node.upper(layout_.z(antenna)) = box.z_hi;
  if (resident_.get() == &node) {
    model_.set_bounds(layout_.w(antenna), box.w_lo, box.w_hi);
    model_.set_bounds(layout_.z(antenna), box.z_lo, box.z_hi);
  }
}

void Solver::add_cut(Node& node, lp::RowDef row) {
  auto cut = std::make_shared<Cut>();
  cut->row = std::move(row);
  cut->serial = next_cut_serial_++;
  node.cuts.push_back(cut);
  node.cut_idle.push_back(0);
  if (resident_.get() == &node) {
    model_.add_row(cut->row);
    resident_cuts_.push_back(std::move(cut));
  } else if (!node.warm.empty()) {
    node.warm.status.push_back(lp::VarStatus::Basic);
  }
}

void Solver::evict_cuts(Node& node) {
  if (resident_.get() != &node) return;
  const int n = layout_.n_antennas;
  const std::size_t soft_cap = static_cast<std::size_t>(6 * n);
  const std::size_t hard_cap = static_cast<std::size_t>(50 * n);
  if (node.cuts.size() < soft_cap) return;

  const lp::Basis current = model_.basis();
  const int core = layout_.num_core_rows();
  const int ns = layout_.num_structural();

  // Oldest first among rows that are slack (logical basic) and have stayed
  // inactive; active rows are never removed.
  std::vector<std::size_t> order(node.cuts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return node.cuts[a]->serial < node.cuts[b]->serial;
  });

  std::vector<int> drop_rows;
  std::vector<char> dropped(node.cuts.size(), 0);
  const std::size_t want_below = soft_cap / 2;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t idx : order) {
      if (node.cuts.size() - drop_rows.size() <= want_below) break;
      if (dropped[idx]) continue;
      const int logical = ns + core + static_cast<int>(idx);
      const bool slack = static_cast<std::size_t>(logical) < current.status.size() &&
                         current.status[logical] == lp::VarStatus::Basic;
      if (!slack) continue;
      const bool idle = node.cut_idle[idx] >= 2;
      if (pass == 0 && !idle) continue;  // first pass: idle rows only
      if (pass == 1 && node.cuts.size() - drop_rows.size() <= hard_cap) break;
      drop_rows.push_back(core + static_cast<int>(idx));
      dropped[idx] = 1;
    }
  }
  if (drop_rows.empty()) return;

  std::sort(drop_rows.begin(), drop_rows.end());
  model_.remove_rows(drop_rows);
  std::vector<std::shared_ptr<const Cut>> kept;
  std::vector<int> kept_idle;
  for (std::size_t i = 0; i < node.cuts.size(); ++i) {
    if (!dropped[i]) {
      kept.push_back(node.cuts[i]);
      kept_idle.push_back(node.cut_idle[i]);
    }
  }
  node.cuts = std::move(kept);
  node.cut_idle = std::move(kept_idle);
  resident_cuts_ = node.cuts;
  node.warm = model_.basis();
}

void Solver::update_cut_idle(Node& node, const lp::Solution& sol) {
  const int core = layout_.num_core_rows();
  for (std::size_t i = 0; i < node.cuts.size(); ++i) {
    const int row = core + static_cast<int>(i);
    const double act = model_.row_activity(sol, row);
    const double rhs = node.cuts[i]->row.rhs;
    const bool tight = std::abs(act - rhs) <= 1e-6 * (1.0 + std::abs(rhs));
    node.cut_idle[i] = tight ? 0 : node.cut_idle[i] + 1;
  }
}

void Solver::load_node(Node& node) {
  if (resident_.get() == &node) return;

  const int nv = layout_.num_structural();
  for (int v = 0; v < nv; ++v) model_.set_bounds(v, node.lower(v), node.upper(v));

  const int core = layout_.num_core_rows();
  const std::size_t shared = [&] {
    std::size_t k = 0;
    while (k < resident_cuts_.size() && k < node.cuts.size() &&
           resident_cuts_[k] == node.cuts[k])
      ++k;
    return k;
  }();
  if (shared == resident_cuts_.size()) {
    for (std::size_t i = shared; i < node.cuts.size(); ++i)
      model_.add_row(node.cuts[i]->row);
  } else {
    model_.truncate_rows(core + static_cast<int>(shared));
    for (std::size_t i = shared; i < node.cuts.size(); ++i)
      model_.add_row(node.cuts[i]->row);
  }
  resident_cuts_ = node.cuts;
}

NodeOutcome Solver::step() {
  std::shared_ptr<Node> node;
  while (true) {
    if (frontier_.empty()) return NodeOutcome::PrunedBound;
    std::pop_heap(frontier_.begin(), frontier_.end(), NodeCmp{});
    node = std::move(frontier_.back());
    frontier_.pop_back();
    if (config_.prune && incumbent_ &&
        ceil_bound(node->bound) >= static_cast<double>(incumbent_card_)) {
      node.reset();  // already dominated; drop without processing
      if (frontier_.empty()) {
        if (config_.record_dual_trace) dual_trace_.push_back(dual_bound());
        return NodeOutcome::PrunedBound;
      }
      continue;
    }
    break;
  }

  if (!node->visited) {
    node->visited = true;
    ++nodes_;
  }

  load_node(*node);
  resident_ = node;

  lp::Solution sol = node->warm.empty() ? model_.solve() : model_.solve(node->warm);
  ++lp_solves_;
  if (sol.status == lp::Status::IterationLimit) {
    model_.clear_basis();
    sol = model_.solve();
    ++lp_solves_;
  }
  const auto outcome = [&]() -> NodeOutcome {
    if (sol.status == lp::Status::Infeasible) return NodeOutcome::PrunedInfeasible;
    if (sol.status == lp::Status::IterationLimit) {
      // Never prune on a failed LP: split the region on some activity
      // variable and keep going.
      for (int n = 0; n < layout_.n_antennas; ++n) {
        const int b = layout_.b(n);
        if (node->lower(b) < node->upper(b)) {
          auto child0 = clone_child(*node, node->bound);
          child0->lower(b) = child0->upper(b) = 0.0;
          child0->lower(layout_.w(n)) = child0->upper(layout_.w(n)) = 0.0;
          child0->lower(layout_.z(n)) = child0->upper(layout_.z(n)) = 0.0;
          auto child1 = clone_child(*node, node->bound);
          child1->lower(b) = child1->upper(b) = 1.0;
          push_node(std::move(child0));
          push_node(std::move(child1));
          return NodeOutcome::BranchedBinary;
        }
      }
      return NodeOutcome::PrunedInfeasible;  // fully fixed and unsolvable
    }

    const double objective = sol.objective;
    node->bound = std::max(node->bound, objective);
    update_cut_idle(*node, sol);
    node->warm = model_.basis();

    if (config_.prune && incumbent_ &&
        ceil_bound(objective) >= static_cast<double>(incumbent_card_))
      return NodeOutcome::PrunedBound;

    const relaxation::Point point = relaxation::split_point(layout_, sol.values);

    // 1. Enforce integrality of the activity variables.
    if (const auto frac = select_fractional(point.b, kIntTol)) {
      const int n = *frac;
      auto child0 = clone_child(*node, objective);
      child0->lower(layout_.b(n)) = child0->upper(layout_.b(n)) = 0.0;
      child0->lower(layout_.w(n)) = child0->upper(layout_.w(n)) = 0.0;
      child0->lower(layout_.z(n)) = child0->upper(layout_.z(n)) = 0.0;
      auto child1 = clone_child(*node, objective);
      child1->lower(layout_.b(n)) = child1->upper(layout_.b(n)) = 1.0;
      push_node(std::move(child0));
      push_node(std::move(child1));
      return NodeOutcome::BranchedBinary;
    }

    // 2. Enforce the convex quadratic constraints with gradient cuts.
    {
      std::vector<lp::RowDef> cuts;
      double worst = 0.0;
      if (auto err = relaxation::separate_error_budget(real_, layout_, point)) {
        worst = std::max(
            worst, relaxation::error_budget_violation(real_, point.w, point.z));
        cuts.push_back(std::move(*err));
      }
      for (int n = 0; n < layout_.n_antennas; ++n) {
        if (auto cut = relaxation::separate_upper_modulus(layout_, n, point)) {
          const double mod2 =
              point.w(n) * point.w(n) + point.z(n) * point.z(n);
          worst = std::max(worst, mod2 - point.b(n));
          cuts.push_back(std::move(*cut));
        }
      }
      if (!cuts.empty() &&
          (node->separation_rounds < 20 || worst > config_.eps)) {
        evict_cuts(*node);
        for (auto& c : cuts) add_cut(*node, std::move(c));
        ++node->separation_rounds;
        node->warm = model_.basis();
        push_node(node);
        return NodeOutcome::ConvexEnforced;
      }
    }

    // 3. Enforce the nonconvex modulus constraints.
    {
      std::vector<char> accepted(layout_.n_antennas, 0);
      while (true) {
        int sel = -1;
        double best_rho = 0.0;
        for (int n = 0; n < layout_.n_antennas; ++n) {
          if (accepted[n]) continue;
          const double mod2 = point.w(n) * point.w(n) + point.z(n) * point.z(n);
          if (mod2 >= point.b(n) || mod2 >= 1.0 - config_.eps) continue;
          const double rho = point.b(n) - mod2;
          if (rho > best_rho) {
            best_rho = rho;
            sel = n;
          }
        }
        if (sel < 0) break;
        const auto handled = config_.modulus_handler
                                 ? handle_modulus(node, sel, point, objective)
                                 : handle_generic(node, sel, point, objective);
        if (handled != NodeOutcome::IntegerFeasible) return handled;
        accepted[sel] = 1;  // degenerate interval: accept within the band
      }
    }

    // 4. Node optimum satisfies everything within tolerance.
    return finish_integral(node, point, objective);
  }();

  if (config_.record_dual_trace) dual_trace_.push_back(dual_bound());
  return outcome;
}

// IntegerFeasible doubles as the "nothing to do here" signal inside the
// modulus loop: a degenerate interval means the antenna is accepted as is.
NodeOutcome Solver::handle_modulus(std::shared_ptr<Node> node, int antenna,
                                   const relaxation::Point& point,
                                   double objective) {
  modulus::AntennaBox box = box_of(*node, antenna);
  const int b_var = layout_.b(antenna);

  if (node->upper(b_var) == 0.0 &&
      (box.w_lo != 0.0 || box.w_hi != 0.0 || box.z_lo != 0.0 || box.z_hi != 0.0)) {
    modulus::try_fix_inactive(0.0, box);
    apply_box(*node, antenna, box);
    push_node(node);
    return NodeOutcome::ModulusHandled;
  }

  if (box.orthant == modulus::Orthant::Unassigned) {
    const auto children = modulus::branch_orthants(box);
    for (const auto& cb : children) {
      auto child = clone_child(*node, objective);
      apply_box(*child, antenna, cb);
      push_node(std::move(child));
    }
    modulus_branch_nodes_ += static_cast<std::int64_t>(children.size());
    return NodeOutcome::ModulusHandled;
  }

  const bool active_fixed = node->lower(b_var) >= 1.0;
  const auto prop = modulus::propagate(box, active_fixed);
  if (prop.infeasible) return NodeOutcome::PrunedInfeasible;
  if (prop.changed) apply_box(*node, antenna, prop.box);

  const auto arc = modulus::arc_interval(prop.box);
  if (!arc) {
    if (active_fixed) return NodeOutcome::PrunedInfeasible;
    // The box misses the circle entirely: the antenna cannot be active.
    modulus::AntennaBox off = prop.box;
    modulus::try_fix_inactive(0.0, off);
    apply_box(*node, antenna, off);
    node->lower(b_var) = node->upper(b_var) = 0.0;
    model_.set_bounds(b_var, 0.0, 0.0);
    push_node(node);
    return NodeOutcome::ModulusHandled;
  }

  if (prop.changed) {
    const double wh = point.w(antenna);
    const double zh = point.z(antenna);
    const double out = std::max({prop.box.w_lo - wh, wh - prop.box.w_hi,
                                 prop.box.z_lo - zh, zh - prop.box.z_hi});
    if (out > 1e-7) {  // propagation alone already cuts the LP point off
      push_node(node);
      return NodeOutcome::ModulusHandled;
    }
  }

  if (auto chord = modulus::separate_chord(layout_, antenna, prop.box, point,
                                           config_.eps)) {
    evict_cuts(*node);
    add_cut(*node, std::move(*chord));
    push_node(node);
    return NodeOutcome::ModulusHandled;
  }

  const auto branch =
      modulus::branch_subarc(layout_, antenna, prop.box, active_fixed);
  if (!branch) return NodeOutcome::IntegerFeasible;  // degenerate: accept

  auto low = clone_child(*node, objective);
  apply_box(*low, antenna, branch->low.box);
  add_cut(*low, branch->low.secant);
  auto high = clone_child(*node, objective);
  apply_box(*high, antenna, branch->high.box);
  add_cut(*high, branch->high.secant);
  push_node(std::move(low));
  push_node(std::move(high));
  modulus_branch_nodes_ += 2;
  return NodeOutcome::ModulusHandled;
}

NodeOutcome Solver::handle_generic(std::shared_ptr<Node> node, int antenna,
                                   const relaxation::Point& point,
                                   double objective) {
  const modulus::AntennaBox box = box_of(*node, antenna);
  const double wh = point.w(antenna);
  const double zh = point.z(antenna);

  if (modulus::box_secant_value(box, wh, zh) < point.b(antenna) - 1e-7) {
    evict_cuts(*node);
    add_cut(*node, modulus::box_secant_cut(layout_, antenna, box));
    push_node(node);
    return NodeOutcome::ModulusHandled;
  }

  const double w_width = box.w_hi - box.w_lo;
  const double z_width = box.z_hi - box.z_lo;
  if (std::max(w_width, z_width) < 1e-9)
    return NodeOutcome::IntegerFeasible;  // degenerate: accept within the band

  const int var = w_width >= z_width ? layout_.w(antenna) : layout_.z(antenna);
  const double lo = node->lower(var);
  const double hi = node->upper(var);
  const double mid = (lo + hi) / 2.0;
  auto low = clone_child(*node, objective);
  low->upper(var) = mid;
  auto high = clone_child(*node, objective);
  high->lower(var) = mid;
  push_node(std::move(low));
  push_node(std::move(high));
  modulus_branch_nodes_ += 2;
  return NodeOutcome::ModulusHandled;
}

bool Solver::try_incumbent(const CandidateSolution& cand) {
  const int card = cand.cardinality();
  if (incumbent_ && card >= incumbent_card_) return false;
  if (!is_feasible(inst_, cand, config_.eps)) return false;
  incumbent_ = cand;
  incumbent_card_ = card;
  return true;
}

NodeOutcome Solver::finish_integral(std::shared_ptr<Node> node,
                                    const relaxation::Point& point,
                                    double objective) {
  const int n = layout_.n_antennas;
  CandidateSolution raw;
  raw.w.setZero(n);
  raw.z.setZero(n);
  raw.active.setZero(n);
  for (int i = 0; i < n; ++i) {
    if (std::round(point.b(i)) >= 1.0) {
      raw.active(i) = 1;
      raw.w(i) = point.w(i);
      raw.z(i) = point.z(i);
    }
  }
  CandidateSolution polished = raw;
  for (int i = 0; i < n; ++i) {
    if (polished.active(i) == 1) {
      const double norm = std::hypot(polished.w(i), polished.z(i));
      if (norm > 0.0) {
        polished.w(i) /= norm;
        polished.z(i) /= norm;
      }
    }
  }

  if (is_feasible(inst_, polished, config_.eps)) {
    try_incumbent(polished);
    return NodeOutcome::IntegerFeasible;
  }
  if (is_feasible(inst_, raw, config_.eps)) {
    try_incumbent(raw);
    return NodeOutcome::IntegerFeasible;
  }

  // Within the modulus band yet infeasible. An unfixed-off antenna whose
  // continuous parts are not exactly zero makes the zeroed candidate drift
  // from the LP point; settle its activity first.
  {
    int pick = -1;
    double pick_mag = 1e-12;
    for (int i = 0; i < n; ++i) {
      if (raw.active(i) != 0) continue;
      if (node->lower(layout_.b(i)) >= node->upper(layout_.b(i))) continue;
      const double mag = std::abs(point.w(i)) + std::abs(point.z(i));
      if (mag > pick_mag) {
        pick_mag = mag;
        pick = i;
      }
    }
    if (pick >= 0) {
      auto child0 = clone_child(*node, objective);
      child0->lower(layout_.b(pick)) = child0->upper(layout_.b(pick)) = 0.0;
      child0->lower(layout_.w(pick)) = child0->upper(layout_.w(pick)) = 0.0;
      child0->lower(layout_.z(pick)) = child0->upper(layout_.z(pick)) = 0.0;
      auto child1 = clone_child(*node, objective);
      child1->lower(layout_.b(pick)) = child1->upper(layout_.b(pick)) = 1.0;
      push_node(std::move(child0));
      push_node(std::move(child1));
      return NodeOutcome::BranchedBinary;
    }
  }

  // Either the error budget is genuinely violated at the point (cut it off),
  // or the band itself is too loose and the worst active antenna needs
  // tighter spatial bounds.
  if (auto err =
          relaxation::separate_error_budget(real_, layout_, point, 1e-12)) {
    evict_cuts(*node);
    add_cut(*node, std::move(*err));
    ++node->separation_rounds;
    push_node(node);
    return NodeOutcome::ConvexEnforced;
  }

  int worst = -1;
  double worst_gap = -1.0;
  for (int i = 0; i < n; ++i) {
    if (raw.active(i) != 1) continue;
    const double mod2 = point.w(i) * point.w(i) + point.z(i) * point.z(i);
    const double gap = std::abs(1.0 - mod2);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst = i;
    }
  }
  if (worst >= 0) {
    const auto out = config_.modulus_handler
                         ? handle_modulus(node, worst, point, objective)
                         : handle_generic(node, worst, point, objective);
    if (out != NodeOutcome::IntegerFeasible) return out;
  }
  // Every box is a point and the point is infeasible: the region is spent.
  return NodeOutcome::PrunedInfeasible;
}

SolveReport Solver::run() {
  start_ = std::chrono::steady_clock::now();
  bool out_of_budget = false;
  while (!finished()) {
    if (elapsed_s() > config_.time_limit_s) {
      out_of_budget = true;
      break;
    }
    if (config_.node_limit >= 0 && nodes_ >= config_.node_limit) {
      out_of_budget = true;
      break;
    }
    step();
  }

  SolveReport report;
  report.nodes = nodes_;
  report.modulus_branch_nodes = modulus_branch_nodes_;
  report.lp_solves = lp_solves_;
  report.wall_time_s = elapsed_s();
  report.dual_trace = dual_trace_;
  if (incumbent_) {
    report.best_cardinality = incumbent_card_;
    report.incumbent = *incumbent_;
  }
  if (out_of_budget) {
    report.status = SolveStatus::TimeLimit;
    report.dual_bound = dual_bound();
  } else if (incumbent_) {
    report.status = SolveStatus::Optimal;
    report.dual_bound = incumbent_card_;
  } else {
    report.status = SolveStatus::Infeasible;
    report.dual_bound = std::numeric_limits<double>::infinity();
  }
  return report;
}

SolveReport solve_exact(const ProblemInstance& inst, const SolveConfig& config) {
  Solver solver(inst, config);
  return solver.run();
}

}  // namespace cmbeam::bnb

// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmbeam::modulus {

namespace {

constexpr double kBoundTol = 1e-9;

struct Q1Box {
  double w_lo, w_hi, z_lo, z_hi;
};

// Reflects the box into the Q1 frame (all coordinates nonnegative for boxes
// honoring their orthant sign restriction).
Q1Box reflect(const AntennaBox& box) {
  const auto [sw, sz] = orthant_signs(box.orthant);
  Q1Box q;
  q.w_lo = sw > 0 ? box.w_lo : -box.w_hi;
  q.w_hi = sw > 0 ? box.w_hi : -box.w_lo;
  q.z_lo = sz > 0 ? box.z_lo : -box.z_hi;
  q.z_hi = sz > 0 ? box.z_hi : -box.z_lo;
  return q;
}

AntennaBox unreflect(const Q1Box& q, Orthant orthant) {
  const auto [sw, sz] = orthant_signs(orthant);
  AntennaBox box;
  box.orthant = orthant;
  box.w_lo = sw > 0 ? q.w_lo : -q.w_hi;
  box.w_hi = sw > 0 ? q.w_hi : -q.w_lo;
  box.z_lo = sz > 0 ? q.z_lo : -q.z_hi;
  box.z_hi = sz > 0 ? q.z_hi : -q.z_lo;
  return box;
}

// f(x) = sqrt(1 - x^2) clamped to the domain [0, 1].
double circle_height(double x) {
  const double c = std::clamp(x, 0.0, 1.0);
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

}  // namespace

std::pair<double, double> orthant_signs(Orthant o) {
  switch (o) {
    case Orthant::Q1: return {1.0, 1.0};
    case Orthant::Q2: return {-1.0, 1.0};
    case Orthant::Q3: return {-1.0, -1.0};
    case Orthant::Q4: return {1.0, -1.0};
    case Orthant::Unassigned: break;
  }
  throw std::logic_error("orthant_signs requires an assigned orthant");
}

std::optional<std::pair<double, double>> arc_interval(const AntennaBox& box) {
  const Q1Box q = reflect(box);
  if (q.w_lo > 1.0 || q.z_lo > 1.0 || q.w_hi < 0.0 || q.z_hi < 0.0)
    return std::nullopt;
  // cos(theta) in [w_lo, w_hi] and sin(theta) in [z_lo, z_hi].
  const double theta_lo = std::max(std::acos(std::clamp(q.w_hi, 0.0, 1.0)),
                                   std::asin(std::clamp(q.z_lo, 0.0, 1.0)));
  const double theta_hi = std::min(std::acos(std::clamp(q.w_lo, 0.0, 1.0)),
                                   std::asin(std::clamp(q.z_hi, 0.0, 1.0)));
  if (theta_lo > theta_hi + kBoundTol) return std::nullopt;
  return std::make_pair(theta_lo, std::max(theta_lo, theta_hi));
}

std::optional<int> select_violated(const relaxation::Point& point, double eps) {
  int best = -1;
  double best_measure = 0.0;
  for (int n = 0; n < point.w.size(); ++n) {
    const double mod2 = point.w(n) * point.w(n) + point.z(n) * point.z(n);
    if (mod2 >= point.b(n)) continue;
    if (mod2 >= 1.0 - eps) continue;
    const double rho = point.b(n) - mod2;
    if (rho > best_measure) {
      best_measure = rho;
      best = n;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

double violation_measure(const relaxation::Point& point, int antenna) {
  return point.b(antenna) - (point.w(antenna) * point.w(antenna) +
                             point.z(antenna) * point.z(antenna));
}

bool try_fix_inactive(double b_upper, AntennaBox& box) {
  if (b_upper != 0.0) return false;
  box.w_lo = box.w_hi = 0.0;
  box.z_lo = box.z_hi = 0.0;
  return true;
}

std::vector<AntennaBox> branch_orthants(const AntennaBox& box) {
  static const Orthant kOrder[4] = {Orthant::Q1, Orthant::Q4, Orthant::Q3,
                                    Orthant::Q2};
  std::vector<AntennaBox> children;
  children.reserve(4);
  for (Orthant o : kOrder) {
    const auto [sw, sz] = orthant_signs(o);
    AntennaBox child = box;
    child.orthant = o;
    if (sw > 0)
      child.w_lo = std::max(child.w_lo, 0.0);
    else
      child.w_hi = std::min(child.w_hi, 0.0);
    if (sz > 0)
      child.z_lo = std::max(child.z_lo, 0.0);
    else
      child.z_hi = std::min(child.z_hi, 0.0);
    if (child.w_lo <= child.w_hi && child.z_lo <= child.z_hi)
      children.push_back(child);
  }
  return children;
}

PropagateResult propagate(const AntennaBox& box, bool active_fixed) {
  if (box.orthant == Orthant::Unassigned)
    throw std::logic_error("propagate requires an assigned orthant");
  Q1Box q = reflect(box);
  PropagateResult result;

  const double u1 = std::min(q.w_hi, circle_height(q.z_lo));
  const double u2 = std::min(q.z_hi, circle_height(q.w_lo));
  double l1 = q.w_lo;
  double l2 = q.z_lo;
  if (active_fixed) {
    l1 = std::max(l1, circle_height(q.z_hi));
    l2 = std::max(l2, circle_height(q.w_hi));
  }
  if (l1 > u1 + kBoundTol || l2 > u2 + kBoundTol) {
    result.infeasible = true;
    result.box = box;
    return result;
  }
  Q1Box tight;
  tight.w_lo = std::min(l1, u1);
  tight.w_hi = u1;
  tight.z_lo = std::min(l2, u2);
  tight.z_hi = u2;
  result.changed = std::abs(tight.w_lo - q.w_lo) > kBoundTol ||
                   std::abs(tight.w_hi - q.w_hi) > kBoundTol ||
                   std::abs(tight.z_lo - q.z_lo) > kBoundTol ||
                   std::abs(tight.z_hi - q.z_hi) > kBoundTol;
  result.box = unreflect(tight, box.orthant);
  return result;
}

std::optional<lp::RowDef> separate_chord(const relaxation::Layout& layout,
                                         int antenna, const AntennaBox& box,
                                         const relaxation::Point& point,
                                         double eps, double feas_tol) {
  const auto [sw, sz] = orthant_signs(box.orthant);
  const double wr = sw * point.w(antenna);
  const double zr = sz * point.z(antenna);
  if (wr * wr + zr * zr >= 1.0 - eps) return std::nullopt;
  if (wr + zr >= point.b(antenna) - feas_tol) return std::nullopt;
  lp::RowDef row;
  row.sense = lp::Sense::GreaterEqual;
  row.coeffs = {{layout.w(antenna), sw}, {layout.z(antenna), sz},
                {layout.b(antenna), -1.0}};
  row.rhs = 0.0;
  return row;
}

namespace {

SubarcChild make_subarc_child(const relaxation::Layout& layout, int antenna,
                              const Q1Box& q, Orthant orthant, double alpha,
                              double beta, bool active_fixed) {
  SubarcChild child;
  const double half = (beta - alpha) / 2.0;
  const double center = (alpha + beta) / 2.0;
  const double denom = std::cos(half);
  const double f = std::cos(center) / denom;
  const double g = std::sin(center) / denom;

  const auto [sw, sz] = orthant_signs(orthant);
  child.secant.sense = lp::Sense::GreaterEqual;
  child.secant.coeffs = {{layout.w(antenna), sw * f},
                         {layout.z(antenna), sz * g},
                         {layout.b(antenna), -1.0}};
  child.secant.rhs = 0.0;

  Q1Box tight = q;
  tight.w_hi = std::min(q.w_hi, std::cos(alpha));
  tight.z_hi = std::min(q.z_hi, std::sin(beta));
  if (active_fixed) {
    tight.w_lo = std::max(q.w_lo, std::cos(beta));
    tight.z_lo = std::max(q.z_lo, std::sin(alpha));
    tight.w_lo = std::min(tight.w_lo, tight.w_hi);
    tight.z_lo = std::min(tight.z_lo, tight.z_hi);
  }
  child.box = unreflect(tight, orthant);
  return child;
}

}  // namespace

std::optional<SubarcBranch> branch_subarc(const relaxation::Layout& layout,
                                          int antenna, const AntennaBox& box,
                                          bool active_fixed, double min_width) {
  const auto arc = arc_interval(box);
  if (!arc) return std::nullopt;
  const auto [lo, hi] = *arc;
  if (hi - lo < min_width) return std::nullopt;
  const double mid = (lo + hi) / 2.0;
  const Q1Box q = reflect(box);

  SubarcBranch branch;
  branch.theta_mid = mid;
  branch.low = make_subarc_child(layout, antenna, q, box.orthant, lo, mid,
                                 active_fixed);
  branch.high = make_subarc_child(layout, antenna, q, box.orthant, mid, hi,
                                  active_fixed);
  return branch;
}

lp::RowDef box_secant_cut(const relaxation::Layout& layout, int antenna,
                          const AntennaBox& box) {
  lp::RowDef row;
  row.sense = lp::Sense::GreaterEqual;
  row.coeffs = {{layout.w(antenna), box.w_lo + box.w_hi},
                {layout.z(antenna), box.z_lo + box.z_hi},
                {layout.b(antenna), -1.0}};
  row.rhs = box.w_lo * box.w_hi + box.z_lo * box.z_hi;
  return row;
}

double box_secant_value(const AntennaBox& box, double w, double z) {
  return (box.w_lo + box.w_hi) * w - box.w_lo * box.w_hi +
         (box.z_lo + box.z_hi) * z - box.z_lo * box.z_hi;
}

}  // namespace cmbeam::modulus

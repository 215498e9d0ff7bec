// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cmbeam/lp.hpp"
#include "cmbeam/relaxation.hpp"

namespace cmbeam::modulus {

/// Quadrant of the (w, z) plane, counter-clockwise: Q1 = (+,+), Q2 = (-,+),
/// Q3 = (-,-), Q4 = (+,-).
enum class Orthant : std::uint8_t { Unassigned, Q1, Q2, Q3, Q4 };

/// Sign pair (sigma_w, sigma_z) whose multiplication maps the orthant onto Q1.
std::pair<double, double> orthant_signs(Orthant o);

/// Per-antenna continuous state: the (w, z) bound box and, once branching
/// has restricted the pair to a quadrant, the assigned orthant. The arc of
/// the unit circle inside the box is the derived angular state.
struct AntennaBox {
  Orthant orthant = Orthant::Unassigned;
  double w_lo = -1.0, w_hi = 1.0;
  double z_lo = -1.0, z_hi = 1.0;
};

/// Angular interval of the unit-circle arc inside the box, expressed in the
/// reflected Q1 frame (radians within [0, pi/2]); empty when the box misses
/// the circle. Requires an assigned orthant.
std::optional<std::pair<double, double>> arc_interval(const AntennaBox& box);

/// Most-infeasible selection: the antenna maximizing
///   rho(n) = b_n - (w_n^2 + z_n^2)
/// among those with w^2 + z^2 < b and w^2 + z^2 < 1 - eps. Ties go to the
/// lowest index; empty when every antenna is inside the acceptance band.
std::optional<int> select_violated(const relaxation::Point& point,
                                   double eps = 1e-5);

/// Violation measure rho(n) of one antenna at a point.
double violation_measure(const relaxation::Point& point, int antenna);

/// When the activity variable is fixed to zero, the disk constraint forces
/// w = z = 0; collapses the box and reports whether that applied.
bool try_fix_inactive(double b_upper, AntennaBox& box);

/// The four orthant children of an unassigned box, in the branching order
/// (+,+), (+,-), (-,-), (-,+). Children whose box intersection is empty are
/// dropped; the union of the rest covers the parent box.
std::vector<AntennaBox> branch_orthants(const AntennaBox& box);

struct PropagateResult {
  bool infeasible = false;
  bool changed = false;
  AntennaBox box;
};

/// Arc bound propagation for an assigned orthant. Upper bounds (in the
/// reflected frame) always tighten toward the circle through
///   u1' = min(u1, f(l2)), u2' = min(u2, f(l1)),   f(x) = sqrt(1 - x^2);
/// lower bounds l1' = max(l1, f(u2)), l2' = max(l2, f(u1)) only when the
/// antenna's activity is fixed on (otherwise w = z = 0 must stay feasible).
/// Reports infeasible when the tightened box is empty.
PropagateResult propagate(const AntennaBox& box, bool active_fixed);

/// Chord cut sigma_w w + sigma_z z >= b, valid for every unit-circle point
/// of the orthant. Returned when the reflected point violates it by more
/// than feas_tol while staying below the 1 - eps acceptance band.
std::optional<lp::RowDef> separate_chord(const relaxation::Layout& layout,
                                         int antenna, const AntennaBox& box,
                                         const relaxation::Point& point,
                                         double eps = 1e-5,
                                         double feas_tol = 1e-7);

struct SubarcChild {
  AntennaBox box;
  lp::RowDef secant;  // f w + g z - b >= 0 in original coordinates
};

struct SubarcBranch {
  SubarcChild low;   // arc [theta_lo, theta_mid]
  SubarcChild high;  // arc [theta_mid, theta_hi]
  double theta_mid = 0.0;
};

/// Bisects the box's angular interval at its midpoint and equips each child
/// with the secant through its sub-arc endpoints,
///   f = cos((a+b)/2) / cos((b-a)/2),  g = sin((a+b)/2) / cos((b-a)/2),
/// plus the sub-arc bounding box (lower bounds only when the activity is
/// fixed on). Empty when the interval is missing or narrower than min_width.
std::optional<SubarcBranch> branch_subarc(const relaxation::Layout& layout,
                                          int antenna, const AntennaBox& box,
                                          bool active_fixed,
                                          double min_width = 1e-9);

/// Box-wide linear overestimate of w^2 + z^2 (per-coordinate secants) turned
/// into the valid cut (l1+u1) w + (l2+u2) z - b >= l1 u1 + l2 u2. This is the
/// generic relaxation used when the specialized handling above is disabled.
lp::RowDef box_secant_cut(const relaxation::Layout& layout, int antenna,
                          const AntennaBox& box);

/// Value of that overestimate at a point (for violation checks).
double box_secant_value(const AntennaBox& box, double w, double z);

}  // namespace cmbeam::modulus

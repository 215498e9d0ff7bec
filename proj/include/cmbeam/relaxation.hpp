// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cmbeam/lp.hpp"
#include "cmbeam/types.hpp"

namespace cmbeam::relaxation {

/// Variable and row layout of the root relaxation. Structural variables are
/// laid out as [w_0..w_{N-1}, z_0..z_{N-1}, b_0..b_{N-1}]; the eight octagon
/// rows of each antenna follow in antenna order.
struct Layout {
  int n_antennas = 0;
  std::vector<std::array<int, 8>> octagon_rows;

  int w(int n) const { return n; }
  int z(int n) const { return n_antennas + n; }
  int b(int n) const { return 2 * n_antennas + n; }
  int num_structural() const { return 3 * n_antennas; }
  int num_core_rows() const { return 8 * n_antennas; }
};

/// LP point split into the per-antenna coordinate blocks.
struct Point {
  Eigen::VectorXd w, z, b;
};

Point split_point(const Layout& layout, const Eigen::VectorXd& values);

/// Builds the root LP into an empty model: minimize sum b_n subject to
/// w, z in [-1, 1], b in [0, 1] and, per antenna,
///   +-w <= b, +-z <= b, +-w +- z <= sqrt(2) b   (eight rows).
/// The binary constraint is relaxed; the quadratic constraints are enforced
/// later through cuts and branching.
Layout build_root(const RealInstance& real, lp::Model& model);

/// Amount by which (w, z) exceeds the squared error budget (<= 0: feasible).
double error_budget_violation(const RealInstance& real,
                              const Eigen::Ref<const Eigen::VectorXd>& w,
                              const Eigen::Ref<const Eigen::VectorXd>& z);

/// Gradient cut separating a point that violates the (convex) error budget
/// constraint by more than feas_tol. The returned row is valid for every
/// (w, z) within the budget and cuts the given point off.
std::optional<lp::RowDef> separate_error_budget(const RealInstance& real,
                                                const Layout& layout,
                                                const Point& point,
                                                double feas_tol = 1e-7);

/// Gradient cut for the convex disk constraint w_n^2 + z_n^2 <= b_n:
///   2 w-hat w + 2 z-hat z - b <= w-hat^2 + z-hat^2.
std::optional<lp::RowDef> separate_upper_modulus(const Layout& layout, int antenna,
                                                 const Point& point,
                                                 double feas_tol = 1e-7);

}  // namespace cmbeam::relaxation

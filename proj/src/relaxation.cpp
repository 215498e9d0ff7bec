// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/relaxation.hpp"

#include <cmath>
#include <stdexcept>

#include "cmbeam/model.hpp"

namespace cmbeam::relaxation {

Point split_point(const Layout& layout, const Eigen::VectorXd& values) {
  const int n = layout.n_antennas;
  Point p;
  p.w = values.segment(0, n);
  p.z = values.segment(n, n);
  p.b = values.segment(2 * n, n);
  return p;
}

Layout build_root(const RealInstance& real, lp::Model& model) {
  if (model.num_variables() != 0 || model.num_rows() != 0)
    throw std::logic_error("build_root expects an empty model");
  const int n = real.n_antennas();
  Layout layout;
  layout.n_antennas = n;

  for (int i = 0; i < n; ++i) model.add_variable(-1.0, 1.0, 0.0);  // w
  for (int i = 0; i < n; ++i) model.add_variable(-1.0, 1.0, 0.0);  // z
  for (int i = 0; i < n; ++i) model.add_variable(0.0, 1.0, 1.0);   // b

  const double root2 = std::sqrt(2.0);
  layout.octagon_rows.resize(n);
  for (int i = 0; i < n; ++i) {
    const int w = layout.w(i);
    const int z = layout.z(i);
    const int b = layout.b(i);
    int r = 0;
    for (const double sw : {1.0, -1.0}) {
      lp::RowDef row;
      row.coeffs = {{w, sw}, {b, -1.0}};
      layout.octagon_rows[i][r++] = model.add_row(std::move(row));
    }
    for (const double sz : {1.0, -1.0}) {
      lp::RowDef row;
      row.coeffs = {{z, sz}, {b, -1.0}};
      layout.octagon_rows[i][r++] = model.add_row(std::move(row));
    }
    for (const double sw : {1.0, -1.0}) {
      for (const double sz : {1.0, -1.0}) {
        lp::RowDef row;
        row.coeffs = {{w, sw}, {z, sz}, {b, -root2}};
        layout.octagon_rows[i][r++] = model.add_row(std::move(row));
      }
    }
  }
  return layout;
}

double error_budget_violation(const RealInstance& real,
                              const Eigen::Ref<const Eigen::VectorXd>& w,
                              const Eigen::Ref<const Eigen::VectorXd>& z) {
  return squared_error(real, w, z) - real.delta();
}

std::optional<lp::RowDef> separate_error_budget(const RealInstance& real,
                                                const Layout& layout,
                                                const Point& point,
                                                double feas_tol) {
  const double violation = error_budget_violation(real, point.w, point.z);
  if (violation <= feas_tol) return std::nullopt;

  // Residual blocks at the point.
  const Eigen::VectorXd re_recv = real.re_channel.transpose() * point.w -
                                  real.im_channel.transpose() * point.z;
  const Eigen::VectorXd im_recv = real.re_channel.transpose() * point.z +
                                  real.im_channel.transpose() * point.w;
  const Eigen::VectorXd e1 = real.re_desired - re_recv;
  const Eigen::VectorXd e2 = real.im_desired - im_recv;

  const Eigen::VectorXd grad_w = -2.0 * (real.re_channel * e1 + real.im_channel * e2);
  const Eigen::VectorXd grad_z = 2.0 * (real.im_channel * e1 - real.re_channel * e2);

  // Linearization g(p) + grad . (v - p) <= 0, written as grad . v <= rhs.
  lp::RowDef row;
  row.sense = lp::Sense::LessEqual;
  double rhs = -violation;
  for (int n = 0; n < layout.n_antennas; ++n) {
    rhs += grad_w(n) * point.w(n) + grad_z(n) * point.z(n);
    if (grad_w(n) != 0.0) row.coeffs.emplace_back(layout.w(n), grad_w(n));
    if (grad_z(n) != 0.0) row.coeffs.emplace_back(layout.z(n), grad_z(n));
  }
  row.rhs = rhs;
  return row;
}

std::optional<lp::RowDef> separate_upper_modulus(const Layout& layout, int antenna,
                                                 const Point& point,
                                                 double feas_tol) {
  const double wh = point.w(antenna);
  const double zh = point.z(antenna);
  const double mod2 = wh * wh + zh * zh;
  if (mod2 <= point.b(antenna) + feas_tol) return std::nullopt;
  lp::RowDef row;
  row.sense = lp::Sense::LessEqual;
  row.coeffs = {{layout.w(antenna), 2.0 * wh},
                {layout.z(antenna), 2.0 * zh},
                {layout.b(antenna), -1.0}};
  row.rhs = mod2;
  return row;
}

}  // namespace cmbeam::relaxation

// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/oracle.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "cmbeam/model.hpp"
#include "cmbeam/rng.hpp"

namespace cmbeam::oracle {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

double fit_from_phases(const ProblemInstance& inst, const std::vector<int>& support,
                       const std::vector<double>& phases, Eigen::VectorXcd* recv_out) {
  Eigen::VectorXcd recv = Eigen::VectorXcd::Zero(inst.n_users());
  for (std::size_t i = 0; i < support.size(); ++i) {
    const Complex coef(std::cos(phases[i]), std::sin(phases[i]));
    recv += coef * inst.channel.row(support[i]).transpose();
  }
  if (recv_out) *recv_out = recv;
  return (inst.desired - recv).norm();
}

}  // namespace

PhaseFit best_phase_fit(const ProblemInstance& inst, const std::vector<int>& support,
                        int restarts, std::uint64_t seed) {
  if (support.empty()) throw std::invalid_argument("support must be nonempty");
  const int s = static_cast<int>(support.size());
  Rng rng(mix_seed({seed, 0x70686173ULL, static_cast<std::uint64_t>(s)}));

  // Channel rows of the support, fetched once.
  std::vector<Eigen::VectorXcd> rows(s);
  for (int i = 0; i < s; ++i) rows[i] = inst.channel.row(support[i]).transpose();

  PhaseFit best;
  best.error = std::numeric_limits<double>::infinity();
  std::vector<Complex> coef(s);

  for (int r = 0; r < restarts; ++r) {
    for (int i = 0; i < s; ++i) {
      const double angle = 2.0 * kPi * rng.uniform01();
      coef[i] = Complex(std::cos(angle), std::sin(angle));
    }
    Eigen::VectorXcd recv = Eigen::VectorXcd::Zero(inst.n_users());
    for (int i = 0; i < s; ++i) recv += coef[i] * rows[i];
    double err = (inst.desired - recv).norm();

    for (int sweep = 0; sweep < 500; ++sweep) {
      for (int i = 0; i < s; ++i) {
        const Eigen::VectorXcd others = inst.desired - (recv - coef[i] * rows[i]);
        const Complex align = rows[i].dot(others);
        if (std::abs(align) == 0.0) continue;
        const Complex updated = align / std::abs(align);
        recv += (updated - coef[i]) * rows[i];
        coef[i] = updated;
      }
      const double new_err = (inst.desired - recv).norm();
      const double gain = err - new_err;
      err = new_err;
      if (gain < 1e-10) break;
    }
    if (err < best.error) {
      best.error = err;
      best.weights.setZero(inst.n_antennas());
      for (int i = 0; i < s; ++i) best.weights(support[i]) = coef[i];
    }
  }
  return best;
}

namespace {

double grid_search(const ProblemInstance& inst, const std::vector<int>& support,
                   int points, std::vector<double>* best_phases) {
  const int s = static_cast<int>(support.size());
  std::vector<double> phases(s, 0.0);
  std::vector<int> index(s, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (int i = 0; i < s; ++i) phases[i] = 2.0 * kPi * index[i] / points;
    const double err = fit_from_phases(inst, support, phases, nullptr);
    if (err < best) {
      best = err;
      if (best_phases) *best_phases = phases;
    }
    int pos = s - 1;
    while (pos >= 0 && ++index[pos] == points) {
      index[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return best;
}

}  // namespace

double grid_phase_fit(const ProblemInstance& inst, const std::vector<int>& support,
                      int points) {
  if (support.empty()) throw std::invalid_argument("support must be nonempty");
  if (support.size() > 3)
    throw std::invalid_argument("grid evaluation is limited to supports of size 3");
  return grid_search(inst, support, points, nullptr);
}

Result brute_force(const ProblemInstance& inst, int max_cardinality,
                   std::uint64_t seed) {
  validate(inst);
  const int n = inst.n_antennas();
  if (n > 12)
    throw std::invalid_argument("brute force enumeration is limited to 12 antennas");
  max_cardinality = std::min(max_cardinality, n);

  Result result;
  const double margin = inst.error_bound * (1.0 + 1e-7);

  // Cardinality zero: the all-off beamformer.
  const double zero_error = inst.desired.norm();
  result.evaluated.push_back({{}, zero_error});
  if (zero_error <= margin) {
    result.min_cardinality = 0;
    result.feasible_found = true;
    result.witness.weights.setZero(n);
    return result;
  }

  for (int m = 1; m <= max_cardinality; ++m) {
    double level_best = std::numeric_limits<double>::infinity();
    PhaseFit level_fit;
    std::vector<int> support(m);
    for (int i = 0; i < m; ++i) support[i] = i;
    while (true) {
      PhaseFit fit = best_phase_fit(inst, support, 64, mix_seed({seed, 0xb7fULL}));
      if (m <= 3) {
        std::vector<double> grid_phases;
        const double grid = grid_search(inst, support, 64, &grid_phases);
        if (grid < fit.error) {
          // The multistart missed; take the grid point instead.
          fit.error = grid;
          fit.weights.setZero(n);
          for (int i = 0; i < m; ++i)
            fit.weights(support[i]) =
                Complex(std::cos(grid_phases[i]), std::sin(grid_phases[i]));
        }
      }
      result.evaluated.push_back({support, fit.error});
      if (fit.error < level_best) {
        level_best = fit.error;
        level_fit = fit;
      }
      // Next lexicographic support.
      int pos = m - 1;
      while (pos >= 0 && support[pos] == n - m + pos) --pos;
      if (pos < 0) break;
      ++support[pos];
      for (int i = pos + 1; i < m; ++i) support[i] = support[i - 1] + 1;
    }
    if (level_best <= margin) {
      result.min_cardinality = m;
      result.feasible_found = true;
      result.witness.weights = level_fit.weights;
      return result;
    }
  }
  return result;
}

}  // namespace cmbeam::oracle

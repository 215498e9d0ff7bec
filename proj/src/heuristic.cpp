// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/heuristic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cmbeam/model.hpp"
#include "cmbeam/rng.hpp"

namespace cmbeam::heuristic {

namespace {

using Complex = std::complex<double>;

// Joint least-squares fit of two channel rows against a residual, solved via
// the 2x2 normal equations with a small ridge when the Gram matrix is
// (numerically) rank deficient.
void two_antenna_fit(const Eigen::VectorXcd& row_u, const Eigen::VectorXcd& row_v,
                     const Eigen::VectorXcd& residual, Complex* coef_u,
                     Complex* coef_v) {
  const double g00 = row_u.squaredNorm();
  const double g11 = row_v.squaredNorm();
  const Complex g01 = row_u.dot(row_v);  // conj(row_u) . row_v
  const Complex r0 = row_u.dot(residual);
  const Complex r1 = row_v.dot(residual);
  double det = g00 * g11 - std::norm(g01);
  double d00 = g00;
  double d11 = g11;
  if (det <= 1e-12 * std::max(1.0, g00 * g11)) {
    d00 += 1e-12;
    d11 += 1e-12;
    det = d00 * d11 - std::norm(g01);
  }
  *coef_u = (d11 * r0 - g01 * r1) / det;
  *coef_v = (d00 * r1 - std::conj(g01) * r0) / det;
}

// Swap proposal against a maintained receive vector; returns true when
// accepted and updates x, recv and error in place.
bool propose_swap(const ProblemInstance& inst, Eigen::VectorXcd& x,
                  Eigen::VectorXcd& recv, double& error, int keep, int enter) {
  const Eigen::VectorXcd row_u = inst.channel.row(keep).transpose();
  const Eigen::VectorXcd row_v = inst.channel.row(enter).transpose();
  const Eigen::VectorXcd residual = inst.desired - recv + x(keep) * row_u;

  Complex coef_u, coef_v;
  two_antenna_fit(row_u, row_v, residual, &coef_u, &coef_v);

  Complex new_u = x(keep);
  Complex new_v = 0.0;
  if (std::abs(coef_u) >= std::abs(coef_v)) {
    if (std::abs(coef_u) > 0.0) new_u = coef_u / std::abs(coef_u);
  } else {
    new_u = 0.0;
    new_v = coef_v / std::abs(coef_v);
  }
  const Eigen::VectorXcd new_recv =
      recv + (new_u - x(keep)) * row_u + new_v * row_v;
  const double new_error = (inst.desired - new_recv).norm();
  if (new_error >= error) return false;
  x(keep) = new_u;
  x(enter) = new_v;
  recv = new_recv;
  error = new_error;
  return true;
}

// Phase-only refit of a single active antenna (used when every antenna is
// active and no swap partner exists).
bool propose_rephase(const ProblemInstance& inst, Eigen::VectorXcd& x,
                     Eigen::VectorXcd& recv, double& error, int antenna) {
  const Eigen::VectorXcd row = inst.channel.row(antenna).transpose();
  const Eigen::VectorXcd residual = inst.desired - recv + x(antenna) * row;
  const Complex align = row.dot(residual);
  if (std::abs(align) == 0.0) return false;
  const Complex new_val = align / std::abs(align);
  const Eigen::VectorXcd new_recv = recv + (new_val - x(antenna)) * row;
  const double new_error = (inst.desired - new_recv).norm();
  if (new_error >= error) return false;
  x(antenna) = new_val;
  recv = new_recv;
  error = new_error;
  return true;
}

}  // namespace

SwapOutcome swap_step(const ProblemInstance& inst, const Eigen::VectorXcd& x,
                      int keep, int enter) {
  if (keep == enter) throw std::invalid_argument("swap partners must differ");
  if (std::abs(std::abs(x(keep)) - 1.0) > 1e-9 || x(enter) != Complex(0.0, 0.0))
    throw std::invalid_argument("swap_step needs an active keep and inactive enter");
  SwapOutcome out;
  out.x = x;
  Eigen::VectorXcd recv = inst.channel.transpose() * x;
  out.error = (inst.desired - recv).norm();
  out.accepted = propose_swap(inst, out.x, recv, out.error, keep, enter);
  return out;
}

Restart run_restart(const ProblemInstance& inst, int level, std::uint64_t sub_seed,
                    int max_count) {
  const int n = inst.n_antennas();
  if (level < 1 || level > n) throw std::invalid_argument("bad sparsity level");
  Rng rng(sub_seed);

  // Uniform support of size `level` via partial Fisher-Yates; the remaining
  // indices stay as the inactive pool.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < level; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<int> support(idx.begin(), idx.begin() + level);
  std::vector<int> inactive(idx.begin() + level, idx.end());

  Restart restart;
  restart.x.setZero(n);
  for (int u : support) {
    const double angle = 2.0 * 3.14159265358979323846 * rng.uniform01();
    restart.x(u) = Complex(std::cos(angle), std::sin(angle));
  }
  Eigen::VectorXcd recv = inst.channel.transpose() * restart.x;
  restart.error = (inst.desired - recv).norm();

  for (int count = 0; count < max_count; ++count) {
    if (level < n) {
      const int u = support[rng.below(static_cast<std::uint64_t>(level))];
      const std::size_t vpos = rng.below(static_cast<std::uint64_t>(n - level));
      const int v = inactive[vpos];
      if (propose_swap(inst, restart.x, recv, restart.error, u, v)) {
        if (restart.x(u) == Complex(0.0, 0.0)) {
          // Support moved from u to v.
          *std::find(support.begin(), support.end(), u) = v;
          inactive[vpos] = u;
        }
      }
    } else {
      const int u = support[rng.below(static_cast<std::uint64_t>(level))];
      propose_rephase(inst, restart.x, recv, restart.error, u);
    }
  }
  return restart;
}

Result solve(const ProblemInstance& inst, const Config& config) {
  validate(inst);
  if (config.max_iter < 1 || config.max_count < 1)
    throw std::invalid_argument("max_iter and max_count must be >= 1");
  if (config.m_guess < 1 || config.m_guess > inst.n_antennas())
    throw std::invalid_argument("m_guess out of range");
  const auto start = std::chrono::steady_clock::now();

  const int n = inst.n_antennas();
  Result best_overall;
  for (int level = config.m_guess; level <= n; ++level) {
    std::vector<Restart> restarts(config.max_iter);
    auto run_range = [&](int begin, int end) {
      for (int i = begin; i < end; ++i) {
        restarts[i] = run_restart(
            inst, level,
            mix_seed({config.seed, static_cast<std::uint64_t>(level),
                      static_cast<std::uint64_t>(i)}),
            config.max_count);
      }
    };
    int workers = 1;
    if (config.parallel_restarts) {
      workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
      workers = std::max(1, std::min(workers, config.max_iter));
    }
    if (workers == 1) {
      run_range(0, config.max_iter);
    } else {
      std::vector<std::thread> pool;
      const int chunk = (config.max_iter + workers - 1) / workers;
      for (int t = 0; t < workers; ++t) {
        const int begin = t * chunk;
        const int end = std::min(config.max_iter, begin + chunk);
        if (begin < end) pool.emplace_back(run_range, begin, end);
      }
      for (auto& th : pool) th.join();
    }

    int best_i = 0;
    for (int i = 1; i < config.max_iter; ++i)
      if (restarts[i].error < restarts[best_i].error) best_i = i;

    const Restart& level_best = restarts[best_i];
    if (level_best.error < best_overall.error) {
      best_overall.solution.weights = level_best.x;
      best_overall.cardinality = level;
      best_overall.error = level_best.error;
    }
    if (level_best.error <= inst.error_bound) {
      best_overall.solution.weights = level_best.x;
      best_overall.cardinality = level;
      best_overall.error = level_best.error;
      best_overall.feasible = true;
      break;
    }
  }
  best_overall.time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return best_overall;
}

}  // namespace cmbeam::heuristic

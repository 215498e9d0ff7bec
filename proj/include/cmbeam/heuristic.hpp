// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

#include "cmbeam/types.hpp"

namespace cmbeam::heuristic {

struct Config {
  int max_iter = 1000;   // random restarts per sparsity level
  int max_count = 1000;  // swap attempts per restart
  int m_guess = 1;       // starting sparsity level
  std::uint64_t seed = 0;
  bool parallel_restarts = false;
  int workers = 0;  // 0: hardware concurrency
};

struct Result {
  ComplexSolution solution;
  int cardinality = 0;
  double error = std::numeric_limits<double>::infinity();
  double time_s = 0.0;
  bool feasible = false;  // error <= instance error bound
};

/// Greedy sparsity search: starting from m_guess active antennas, runs
/// max_iter random restarts of a swap-based local search per level and grows
/// the level until the best error meets the budget (or every antenna is
/// active). Active entries always have unit modulus and exactly `cardinality`
/// of them are nonzero. Deterministic for a fixed seed, also across the
/// serial/parallel restart modes.
Result solve(const ProblemInstance& inst, const Config& config = {});

/// One swap proposal: remove antenna `keep`'s contribution from the fit,
/// jointly refit (keep, enter) by unconstrained least squares, then retain
/// whichever of the two carries the larger coefficient, re-phased onto the
/// unit circle. The proposal is accepted only on strict error decrease.
/// Requires |x(keep)| = 1 and x(enter) = 0.
struct SwapOutcome {
  Eigen::VectorXcd x;
  double error = 0.0;
  bool accepted = false;
};
SwapOutcome swap_step(const ProblemInstance& inst, const Eigen::VectorXcd& x,
                      int keep, int enter);

/// One local-search run at sparsity `level`: uniform random support, uniform
/// random phases, then max_count swap proposals between a random active and
/// a random inactive antenna (phase-only refits when level == N). The error
/// sequence is non-increasing.
struct Restart {
  Eigen::VectorXcd x;
  double error = 0.0;
};
Restart run_restart(const ProblemInstance& inst, int level, std::uint64_t sub_seed,
                    int max_count);

}  // namespace cmbeam::heuristic

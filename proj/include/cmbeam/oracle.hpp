// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cmbeam/types.hpp"

namespace cmbeam::oracle {

/// Best unit-modulus fit on a fixed support.
struct PhaseFit {
  double error = 0.0;
  Eigen::VectorXcd weights;  // zero off the support
};

/// Multistart cyclic coordinate descent over the phases: each coordinate
/// update aligns one antenna with the residual of the others (the exact 1-D
/// optimum); sweeps stop when the error improves by less than 1e-10.
/// Heuristic in the multivariate case, hence an upper bound on the true
/// minimum.
PhaseFit best_phase_fit(const ProblemInstance& inst, const std::vector<int>& support,
                        int restarts = 64, std::uint64_t seed = 0);

/// Plain dense evaluation over a phase grid (points^|support| combinations,
/// no refinement). Intended as a cross-check for supports of size <= 3.
double grid_phase_fit(const ProblemInstance& inst, const std::vector<int>& support,
                      int points = 64);

struct SupportRecord {
  std::vector<int> support;
  double error = 0.0;
};

struct Result {
  int min_cardinality = -1;  // -1: nothing feasible up to the cap
  ComplexSolution witness;
  bool feasible_found = false;
  std::vector<SupportRecord> evaluated;  // every support tried, in order
};

/// Exhaustive support enumeration: for cardinality 0, 1, ... up to
/// max_cardinality evaluates every support and stops at the first level with
/// an error within error_bound * (1 + 1e-7). Supports of size <= 3 are
/// additionally cross-checked against the dense phase grid. Limited to
/// instances with at most 12 antennas.
Result brute_force(const ProblemInstance& inst, int max_cardinality,
                   std::uint64_t seed = 0);

}  // namespace cmbeam::oracle

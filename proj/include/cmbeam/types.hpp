// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cmbeam {

/// Joint antenna-selection / constant-modulus beamformer design instance.
///
/// `channel` has one column per user (N antennas x K users). `desired` is the
/// target receive vector at the users. A beamformer x in C^N is acceptable
/// when ||desired - channel^T x||_2 <= error_bound and every nonzero entry
/// has |x_n| = modulus. The goal is the fewest nonzero entries.
struct ProblemInstance {
  Eigen::MatrixXcd channel;  // N x K; column k is the channel to user k
  Eigen::VectorXcd desired;  // length K
  double error_bound = 0.0;  // Euclidean error budget, >= 0
  double modulus = 1.0;      // magnitude of active entries; fixed to 1 here

  int n_antennas() const { return static_cast<int>(channel.rows()); }
  int n_users() const { return static_cast<int>(channel.cols()); }

  /// Squared error budget.
  double delta() const { return error_bound * error_bound; }
};

/// Checks structural invariants (dimensions, no all-zero user channel,
/// nonnegative budget, unit modulus). Throws std::invalid_argument.
void validate(const ProblemInstance& inst);

/// Real-valued view of an instance: Re/Im parts of channel and desired
/// vector, as used by the linear/quadratic formulation over (w, z) with
/// x = w + i z.
struct RealInstance {
  Eigen::MatrixXd re_channel;  // N x K
  Eigen::MatrixXd im_channel;  // N x K
  Eigen::VectorXd re_desired;  // K
  Eigen::VectorXd im_desired;  // K
  double error_bound = 0.0;

  int n_antennas() const { return static_cast<int>(re_channel.rows()); }
  int n_users() const { return static_cast<int>(re_channel.cols()); }
  double delta() const { return error_bound * error_bound; }
};

/// Solution in split real form: x = w + i z with activity flags.
/// Feasible solutions satisfy: active(n) == 0 implies w(n) == z(n) == 0,
/// and active(n) == 1 implies w(n)^2 + z(n)^2 == 1 (within tolerance).
struct CandidateSolution {
  Eigen::VectorXd w;
  Eigen::VectorXd z;
  Eigen::VectorXi active;  // entries in {0, 1}

  int cardinality() const { return active.sum(); }
};

/// Solution as a complex beamformer vector.
struct ComplexSolution {
  Eigen::VectorXcd weights;

  int cardinality() const {
    int count = 0;
    for (Eigen::Index n = 0; n < weights.size(); ++n)
      if (weights(n) != std::complex<double>(0.0, 0.0)) ++count;
    return count;
  }
};

ComplexSolution to_complex(const CandidateSolution& sol);
CandidateSolution to_candidate(const ComplexSolution& sol);

}  // namespace cmbeam

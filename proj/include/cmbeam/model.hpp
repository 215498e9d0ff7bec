// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cmbeam/types.hpp"

namespace cmbeam {

/// QPSK symbol magnitude used by instance generation.
inline constexpr double kQpskMagnitude = 1.414;

/// Splits an instance into its real-valued parts. Total function; the pair
/// (to_real, to_problem) round-trips exactly.
RealInstance to_real(const ProblemInstance& inst);
ProblemInstance to_problem(const RealInstance& real);

/// Euclidean error ||desired - channel^T x||_2 of a beamformer x.
/// Throws std::invalid_argument on dimension mismatch.
double residual(const ProblemInstance& inst,
                const Eigen::Ref<const Eigen::VectorXcd>& x);

/// Squared error evaluated from the real-valued parts:
///   sum_k (Re s_k - (Re h_k . w - Im h_k . z))^2
///        + (Im s_k - (Re h_k . z + Im h_k . w))^2.
/// Agrees with residual()^2 for x = w + i z.
double squared_error(const RealInstance& real,
                     const Eigen::Ref<const Eigen::VectorXd>& w,
                     const Eigen::Ref<const Eigen::VectorXd>& z);

/// Feasibility of a split-form solution at tolerance eps:
/// squared residual <= delta * (1 + eps), inactive entries exactly zero, and
/// active entries with modulus^2 in [1 - eps, 1 + eps].
bool is_feasible(const ProblemInstance& inst, const CandidateSolution& sol,
                 double eps = 1e-5);

/// Draws a Rayleigh-fading multicast instance: channel entries i.i.d.
/// circularly-symmetric complex Gaussian with unit variance, desired vector
/// equal in every entry to one QPSK symbol of magnitude kQpskMagnitude.
/// Deterministic for a fixed seed.
ProblemInstance generate_instance(int n_antennas, int n_users,
                                  double error_bound, std::uint64_t seed);

/// Maps a benchmark preset name ("0.1q" or "0.2q") to the Euclidean error
/// bound sqrt(0.1 * q) resp. sqrt(0.2 * q). Throws on unknown names.
double preset_error_bound(std::string_view preset);

/// JSON (de)serialization. Schema:
///   {"n": int, "k": int, "tol": double,
///    "channel": [[ [re, im] x K ] x N], "desired": [[re, im] x K]}
/// "tol" is the Euclidean error bound. Doubles round-trip losslessly.
ProblemInstance parse_instance(const std::string& json_text);
std::string dump_instance(const ProblemInstance& inst);
ProblemInstance read_instance(const std::string& path);
void write_instance(const ProblemInstance& inst, const std::string& path);

}  // namespace cmbeam

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmbeam/heuristic.hpp"
#include "cmbeam/types.hpp"

namespace cmbeam::bench {

/// (prod (v_i + shift))^(1/n) - shift. Damps the influence of easy
/// instances on aggregate statistics. Throws on empty input.
double shifted_geometric_mean(const std::vector<double>& values, double shift);
double geometric_mean(const std::vector<double>& values);
double arithmetic_mean(const std::vector<double>& values);

/// One benchmark run: an (instance, algorithm variant) pair.
/// Sentinels: nodes < 0 and *_card < 0 mean "not applicable".
struct RunRecord {
  std::string instance_id;
  int n = 0;
  int k = 0;
  std::string preset;
  std::uint64_t seed = 0;  // repetition index within the cell
  std::string variant;
  std::int64_t nodes = -1;
  double time_s = 0.0;
  std::string status;
  int opt_card = -1;
  int heur_card = -1;
  double heur_time_s = -1.0;
};

/// Known variant names: default, modulus, default+heur, modulus+heur, heur.
bool variant_known(const std::string& name);
bool variant_runs_exact(const std::string& name);
bool variant_runs_heuristic(const std::string& name);
bool variant_modulus_handler(const std::string& name);

struct SuiteConfig {
  std::vector<int> n_values = {16, 32};
  std::vector<int> k_values = {2, 3, 4};
  std::vector<std::string> presets = {"0.1q", "0.2q"};
  int seeds_per_cell = 3;
  std::vector<std::string> variants = {"modulus", "modulus+heur", "heur"};
  double time_limit_s = 300.0;
  std::int64_t node_limit = 10000;  // deterministic work cap; < 0 disables
  std::uint64_t master_seed = 1;
  int workers = 1;
  heuristic::Config heuristic_config;  // seed is derived per instance

  /// Desk-scale defaults (the values above).
  static SuiteConfig desk();
  /// The full grid: N up to 64, two repetitions, all five variants, one hour
  /// per run and no node cap.
  static SuiteConfig full();
};

/// Runs the whole grid. Instances run concurrently up to `workers`; each
/// solve stays single-threaded. Record order and all fields except wall
/// times are deterministic for a fixed master seed.
std::vector<RunRecord> run_suite(const SuiteConfig& config,
                                 std::ostream* progress = nullptr);

/// CSV with header instance,N,K,preset,seed,variant,nodes,time_s,status,
/// opt_card,heur_card,heur_time_s. Sentinel fields are left empty.
std::string to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_csv(const std::string& text);
void write_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_csv(const std::string& path);

/// Per-variant geometric / shifted geometric / arithmetic means of node
/// counts (shift 100) and solve times (shift 10), as a printable block.
std::string summary_block(const std::vector<RunRecord>& records);

}  // namespace cmbeam::bench

// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: instance generation, single solves and the
// benchmark harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmbeam/bench.hpp"
#include "cmbeam/bnb.hpp"
#include "cmbeam/heuristic.hpp"
#include "cmbeam/model.hpp"
#include "cmbeam/rng.hpp"

namespace {

using nlohmann::json;

int run_gen(int n, int k, std::optional<double> tol, std::optional<std::string> preset,
            std::optional<double> delta, std::uint64_t seed,
            const std::string& out_path) {
  int sources = int(tol.has_value()) + int(preset.has_value()) + int(delta.has_value());
  if (sources != 1) {
    std::cerr << "gen: specify exactly one of --tol, --preset, --delta\n";
    return 2;
  }
  double bound = 0.0;
  if (tol)
    bound = *tol;
  else if (preset)
    bound = cmbeam::preset_error_bound(*preset);
  else
    bound = std::sqrt(*delta);

  const auto inst = cmbeam::generate_instance(n, k, bound, seed);
  if (out_path.empty() || out_path == "-") {
    std::cout << cmbeam::dump_instance(inst) << "\n";
  } else {
    cmbeam::write_instance(inst, out_path);
    std::cerr << "wrote " << out_path << "\n";
  }
  return 0;
}

json solution_to_json(const cmbeam::ComplexSolution& sol) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < sol.weights.size(); ++i)
    arr.push_back({sol.weights(i).real(), sol.weights(i).imag()});
  return arr;
}

int run_solve(const std::string& in_path, const std::string& variant,
              double time_limit, double eps, std::uint64_t seed,
              std::int64_t node_limit, const cmbeam::heuristic::Config& heur_base,
              const std::string& out_path) {
  if (!cmbeam::bench::variant_known(variant)) {
    std::cerr << "solve: unknown variant " << variant << "\n";
    return 2;
  }
  const auto inst = cmbeam::read_instance(in_path);

  json out;
  out["instance"] = in_path;
  out["variant"] = variant;

  cmbeam::heuristic::Result heur;
  const bool with_heur = cmbeam::bench::variant_runs_heuristic(variant);
  if (with_heur) {
    cmbeam::heuristic::Config hc = heur_base;
    hc.seed = seed;
    heur = cmbeam::heuristic::solve(inst, hc);
    out["heuristic"] = {{"feasible", heur.feasible},
                        {"cardinality", heur.cardinality},
                        {"error", heur.error},
                        {"time_s", heur.time_s}};
    if (heur.feasible) out["heuristic"]["x"] = solution_to_json(heur.solution);
    std::cerr << "heuristic: cardinality " << heur.cardinality << ", error "
              << heur.error << (heur.feasible ? "" : " (infeasible)") << ", "
              << heur.time_s << " s\n";
  }

  if (cmbeam::bench::variant_runs_exact(variant)) {
    cmbeam::bnb::SolveConfig config;
    config.time_limit_s = time_limit;
    config.eps = eps;
    config.modulus_handler = cmbeam::bench::variant_modulus_handler(variant);
    config.node_limit = node_limit;
    if (with_heur && heur.feasible)
      config.initial_solution = cmbeam::to_candidate(heur.solution);
    const auto report = cmbeam::bnb::solve_exact(inst, config);

    const char* status = report.status == cmbeam::bnb::SolveStatus::Optimal
                             ? "optimal"
                             : report.status == cmbeam::bnb::SolveStatus::TimeLimit
                                   ? "time-limit"
                                   : "infeasible";
    out["status"] = status;
    out["nodes"] = report.nodes;
    out["modulus_branch_nodes"] = report.modulus_branch_nodes;
    out["lp_solves"] = report.lp_solves;
    out["time_s"] = report.wall_time_s;
    out["dual_bound"] = report.dual_bound;
    if (report.best_cardinality >= 0) {
      out["cardinality"] = report.best_cardinality;
      out["x"] = solution_to_json(cmbeam::to_complex(report.incumbent));
    }
    std::cerr << "exact: status " << status << ", cardinality "
              << report.best_cardinality << ", nodes " << report.nodes << ", "
              << report.wall_time_s << " s\n";
  } else {
    out["status"] = heur.feasible ? "feasible" : "failed";
    out["cardinality"] = heur.cardinality;
    out["time_s"] = heur.time_s;
    if (heur.feasible) out["x"] = solution_to_json(heur.solution);
  }

  if (out_path.empty() || out_path == "-") {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) {
      std::cerr << "cannot open " << out_path << "\n";
      return 1;
    }
    f << out.dump(2) << "\n";
    std::cerr << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-cardinality constant-modulus beamformer design"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance file");
  int gen_n = 16, gen_k = 2;
  std::optional<double> gen_tol, gen_delta;
  std::optional<std::string> gen_preset;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "antennas")->check(CLI::PositiveNumber);
  gen->add_option("--k", gen_k, "users")->check(CLI::PositiveNumber);
  gen->add_option("--tol", gen_tol, "Euclidean error bound");
  gen->add_option("--preset", gen_preset, "tolerance preset (0.1q or 0.2q)");
  gen->add_option("--delta", gen_delta, "squared error budget (tol = sqrt(delta))");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output path ('-': stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance file");
  std::string solve_in, solve_out, solve_variant = "modulus+heur";
  double solve_time_limit = 3600.0, solve_eps = 1e-5;
  std::uint64_t solve_seed = 0;
  std::int64_t solve_node_limit = -1;
  cmbeam::heuristic::Config heur_base;
  solve->add_option("--in", solve_in, "instance file")->required();
  solve->add_option("--out", solve_out, "solution/report path ('-': stdout)");
  solve->add_option("--variant", solve_variant,
                    "default|modulus|default+heur|modulus+heur|heur");
  solve->add_option("--time-limit", solve_time_limit, "seconds");
  solve->add_option("--eps", solve_eps, "feasibility tolerance");
  solve->add_option("--seed", solve_seed, "heuristic seed");
  solve->add_option("--node-limit", solve_node_limit, "node cap (<0: none)");
  solve->add_option("--max-iter", heur_base.max_iter, "heuristic restarts per level");
  solve->add_option("--max-count", heur_base.max_count, "heuristic swaps per restart");
  solve->add_option("--m-guess", heur_base.m_guess, "heuristic starting level");
  solve->add_flag("--parallel-restarts", heur_base.parallel_restarts,
                  "run heuristic restarts in parallel");

  // suite
  auto* suite = app.add_subcommand("suite", "run a benchmark grid");
  std::string suite_grid = "desk", suite_csv, suite_variants;
  int suite_seeds = -1, suite_workers = 1;
  double suite_time_limit = -1.0;
  std::int64_t suite_node_limit = -2;
  std::uint64_t suite_master = 1;
  suite->add_option("--grid", suite_grid, "desk|full");
  suite->add_option("--csv", suite_csv, "output CSV path")->required();
  suite->add_option("--seeds", suite_seeds, "repetitions per cell");
  suite->add_option("--workers", suite_workers, "concurrent instances");
  suite->add_option("--variants", suite_variants, "comma-separated variant list");
  suite->add_option("--time-limit", suite_time_limit, "seconds per run");
  suite->add_option("--node-limit", suite_node_limit, "node cap (<0: none)");
  suite->add_option("--master-seed", suite_master, "master seed");

  // stats
  auto* stats = app.add_subcommand("stats", "summarize a benchmark CSV");
  std::string stats_csv;
  stats->add_option("--csv", stats_csv, "input CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return run_gen(gen_n, gen_k, gen_tol, gen_preset, gen_delta, gen_seed, gen_out);

    if (solve->parsed())
      return run_solve(solve_in, solve_variant, solve_time_limit, solve_eps,
                       solve_seed, solve_node_limit, heur_base, solve_out);

    if (suite->parsed()) {
      cmbeam::bench::SuiteConfig config = suite_grid == "full"
                                              ? cmbeam::bench::SuiteConfig::full()
                                              : cmbeam::bench::SuiteConfig::desk();
      if (suite_grid != "full" && suite_grid != "desk") {
        std::cerr << "suite: unknown grid " << suite_grid << "\n";
        return 2;
      }
      if (suite_seeds > 0) config.seeds_per_cell = suite_seeds;
      if (suite_time_limit > 0) config.time_limit_s = suite_time_limit;
      if (suite_node_limit > -2) config.node_limit = suite_node_limit;
      config.workers = suite_workers;
      config.master_seed = suite_master;
      if (!suite_variants.empty()) {
        config.variants.clear();
        std::size_t start = 0;
        while (start <= suite_variants.size()) {
          const auto comma = suite_variants.find(',', start);
          config.variants.push_back(suite_variants.substr(start, comma - start));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      const auto records = cmbeam::bench::run_suite(config, &std::cerr);
      cmbeam::bench::write_csv(records, suite_csv);
      std::cout << cmbeam::bench::summary_block(records);
      return 0;
    }

    if (stats->parsed()) {
      const auto records = cmbeam::bench::read_csv(stats_csv);
      std::cout << cmbeam::bench::summary_block(records);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

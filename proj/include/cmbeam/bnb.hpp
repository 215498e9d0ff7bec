// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cmbeam/lp.hpp"
#include "cmbeam/model.hpp"
#include "cmbeam/modulus.hpp"
#include "cmbeam/relaxation.hpp"
#include "cmbeam/types.hpp"

namespace cmbeam::bnb {

enum class SolveStatus : std::uint8_t { Optimal, TimeLimit, Infeasible };

/// Outcome of processing one frontier node.
enum class NodeOutcome : std::uint8_t {
  BranchedBinary,    // fractional activity variable: two children
  ConvexEnforced,    // gradient cuts added, node re-queued
  ModulusHandled,    // fixing / propagation / chord / spatial branching
  IntegerFeasible,   // node optimum is feasible; incumbent updated if better
  PrunedBound,       // bound >= incumbent cardinality
  PrunedInfeasible,  // LP or propagation proved the region empty
};

struct SolveConfig {
  double time_limit_s = 3600.0;
  double eps = 1e-5;             // feasibility band for the modulus constraints
  bool modulus_handler = true;   // specialized handling vs. generic box secants
  std::optional<CandidateSolution> initial_solution;
  std::int64_t node_limit = -1;  // < 0: unlimited; a deterministic work cap
  bool prune = true;             // test hook: disable bound pruning
  bool record_dual_trace = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  int best_cardinality = -1;  // -1: no feasible solution known
  CandidateSolution incumbent;
  std::int64_t nodes = 0;                 // tree nodes processed
  std::int64_t modulus_branch_nodes = 0;  // children created enforcing modulus
  std::int64_t lp_solves = 0;
  double wall_time_s = 0.0;
  double dual_bound = 0.0;
  std::vector<double> dual_trace;  // filled when record_dual_trace
};

/// A cut row plus its creation stamp (used for oldest-first eviction).
struct Cut {
  lp::RowDef row;
  std::uint64_t serial = 0;
};

/// Branch-and-bound node: bound box for all structural variables, per-antenna
/// orthant state, inherited cuts and a warm-start basis.
struct Node {
  std::uint64_t seq = 0;
  int depth = 0;
  double bound = 0.0;
  bool visited = false;
  int separation_rounds = 0;
  Eigen::VectorXd lower, upper;
  std::vector<modulus::Orthant> orthant;
  std::vector<std::shared_ptr<const Cut>> cuts;
  std::vector<int> cut_idle;  // LP solves since the cut was last tight
  lp::Basis warm;
};

/// Most-fractional activity variable (ties to the lowest index); empty when
/// all entries are within tol of an integer.
std::optional<int> select_fractional(const Eigen::VectorXd& b, double tol = 1e-6);

/// Branch-and-bound solver with a stepping interface for inspection.
class Solver {
 public:
  Solver(const ProblemInstance& inst, SolveConfig config);

  SolveReport run();

  bool finished() const;
  NodeOutcome step();  // processes one frontier pop; finished() must be false
  double dual_bound() const;
  int incumbent_cardinality() const;
  const std::optional<CandidateSolution>& incumbent() const;
  std::int64_t nodes_processed() const { return nodes_; }
  std::int64_t modulus_branch_nodes() const { return modulus_branch_nodes_; }
  std::int64_t frontier_size() const { return static_cast<std::int64_t>(frontier_.size()); }

 private:
  struct NodeCmp {
    bool operator()(const std::shared_ptr<Node>& a,
                    const std::shared_ptr<Node>& b) const;
  };

  modulus::AntennaBox box_of(const Node& node, int antenna) const;
  void apply_box(Node& node, int antenna, const modulus::AntennaBox& box);
  void load_node(Node& node);
  void push_node(std::shared_ptr<Node> node);
  std::shared_ptr<Node> clone_child(const Node& parent, double bound);
  void add_cut(Node& node, lp::RowDef row);
  void evict_cuts(Node& node);
  void update_cut_idle(Node& node, const lp::Solution& sol);
  NodeOutcome handle_modulus(std::shared_ptr<Node> node, int antenna,
                             const relaxation::Point& point, double objective);
  NodeOutcome handle_generic(std::shared_ptr<Node> node, int antenna,
                             const relaxation::Point& point, double objective);
  NodeOutcome finish_integral(std::shared_ptr<Node> node,
                              const relaxation::Point& point, double objective);
  bool try_incumbent(const CandidateSolution& cand);
  double elapsed_s() const;

  ProblemInstance inst_;
  RealInstance real_;
  SolveConfig config_;
  lp::Model model_;
  relaxation::Layout layout_;

  std::vector<std::shared_ptr<Node>> frontier_;  // min-heap via NodeCmp
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_cut_serial_ = 0;

  std::optional<CandidateSolution> incumbent_;
  int incumbent_card_ = 0;  // meaningful when incumbent_ set

  std::shared_ptr<Node> resident_;
  std::vector<std::shared_ptr<const Cut>> resident_cuts_;

  std::int64_t nodes_ = 0;
  std::int64_t modulus_branch_nodes_ = 0;
  std::int64_t lp_solves_ = 0;
  std::vector<double> dual_trace_;
  std::chrono::steady_clock::time_point start_;
};

SolveReport solve_exact(const ProblemInstance& inst, const SolveConfig& config = {});

}  // namespace cmbeam::bnb

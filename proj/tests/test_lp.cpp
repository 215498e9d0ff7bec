// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cmbeam/lp.hpp"
#include "cmbeam/model.hpp"
#include "cmbeam/relaxation.hpp"
#include "cmbeam/rng.hpp"
#include "support/reference_simplex.hpp"

using namespace cmbeam;
namespace rs = refsimplex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Builds the same LP in the production model and the reference form.
struct TwinLp {
  lp::Model model;
  rs::RefProblem ref;

  int add_var(double lo, double hi, double cost) {
    ref.lower.push_back(lo);
    ref.upper.push_back(hi);
    ref.cost.push_back(cost);
    return model.add_variable(lo, hi, cost);
  }
  void add_row(std::vector<std::pair<int, double>> coeffs, lp::Sense sense,
               double rhs) {
    rs::RefRow row;
    row.coeffs = coeffs;
    row.sense = sense == lp::Sense::LessEqual ? -1
                : sense == lp::Sense::GreaterEqual ? 1
                                                   : 0;
    row.rhs = rhs;
    ref.rows.push_back(row);
    lp::RowDef def;
    def.coeffs = std::move(coeffs);
    def.sense = sense;
    def.rhs = rhs;
    model.add_row(std::move(def));
  }
  void set_bounds(int v, double lo, double hi) {
    ref.lower[v] = lo;
    ref.upper[v] = hi;
    model.set_bounds(v, lo, hi);
  }
};

void check_against_reference(TwinLp& twin, const char* what) {
  const rs::RefResult expected = rs::solve_reference(twin.ref);
  const lp::Solution got = twin.model.solve();
  INFO(what);
  if (expected.status == rs::RefStatus::Optimal) {
    REQUIRE(got.status == lp::Status::Optimal);
    CHECK(got.objective ==
          doctest::Approx(expected.objective).epsilon(1e-7).scale(1.0));
  } else if (expected.status == rs::RefStatus::Infeasible) {
    REQUIRE(got.status == lp::Status::Infeasible);
  }
}

TwinLp random_lp(Rng& rng, int nvars, int nrows) {
  TwinLp twin;
  for (int v = 0; v < nvars; ++v) {
    const double lo = -1.0 - 2.0 * rng.uniform01();
    const double hi = 1.0 + 2.0 * rng.uniform01();
    const double cost = std::floor(rng.uniform01() * 5.0) - 2.0;
    twin.add_var(lo, hi, cost);
  }
  for (int r = 0; r < nrows; ++r) {
    std::vector<std::pair<int, double>> coeffs;
    for (int v = 0; v < nvars; ++v) {
      if (rng.uniform01() < 0.6) {
        const double c = std::floor(rng.uniform01() * 7.0) - 3.0;
        if (c != 0.0) coeffs.emplace_back(v, c);
      }
    }
    if (coeffs.empty()) coeffs.emplace_back(0, 1.0);
    const double rhs = 6.0 * rng.uniform01() - 3.0;
    const double pick = rng.uniform01();
    const lp::Sense sense = pick < 0.45   ? lp::Sense::LessEqual
                            : pick < 0.9 ? lp::Sense::GreaterEqual
                                          : lp::Sense::Equal;
    twin.add_row(std::move(coeffs), sense, rhs);
  }
  return twin;
}

}  // namespace

TEST_CASE("one-variable minimum sits at the lower bound") {
  lp::Model model;
  const int b = model.add_variable(0.0, 1.0, 1.0);
  const auto sol = model.solve();
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.values(b) == doctest::Approx(0.0));
}

TEST_CASE("free variables with chained rows") {
  lp::Model model;
  const int w = model.add_variable(-kInf, kInf, -1.0);
  const int b = model.add_variable(-kInf, kInf, 0.0);
  model.add_row({{{w, 1.0}, {b, -1.0}}, lp::Sense::LessEqual, 0.0});
  model.add_row({{{b, 1.0}}, lp::Sense::LessEqual, 1.0});
  const auto sol = model.solve();
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.values(w) == doctest::Approx(1.0));
}

TEST_CASE("octagon toy reproduces the hand optimum") {
  // One antenna, activity cost 1, with w pushed to 0.9: the tightest octagon
  // row is w <= b, so the optimum is b = 0.9 with z = 0.
  TwinLp twin;
  const int w = twin.add_var(-1.0, 1.0, 0.0);
  const int z = twin.add_var(-1.0, 1.0, 0.0);
  const int b = twin.add_var(0.0, 1.0, 1.0);
  const double r2 = std::sqrt(2.0);
  twin.add_row({{w, 1.0}, {b, -1.0}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{w, -1.0}, {b, -1.0}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{z, 1.0}, {b, -1.0}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{z, -1.0}, {b, -1.0}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{w, 1.0}, {z, 1.0}, {b, -r2}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{w, 1.0}, {z, -1.0}, {b, -r2}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{w, -1.0}, {z, 1.0}, {b, -r2}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{w, -1.0}, {z, -1.0}, {b, -r2}}, lp::Sense::LessEqual, 0.0);
  twin.add_row({{w, 1.0}}, lp::Sense::GreaterEqual, 0.9);

  const auto sol = twin.model.solve();
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(sol.values(b) == doctest::Approx(0.9).epsilon(1e-9));
  check_against_reference(twin, "octagon toy");
}

TEST_CASE("random LPs agree with the reference solver") {
  Rng rng(2024);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int nvars = 2 + static_cast<int>(rng.below(5));
    const int nrows = 1 + static_cast<int>(rng.below(8));
    TwinLp twin = random_lp(rng, nvars, nrows);
    const rs::RefResult expected = rs::solve_reference(twin.ref);
    const lp::Solution got = twin.model.solve();
    INFO("trial ", trial);
    if (expected.status == rs::RefStatus::Optimal) {
      REQUIRE(got.status == lp::Status::Optimal);
      CHECK(got.objective ==
            doctest::Approx(expected.objective).epsilon(1e-7).scale(1.0));
    } else {
      REQUIRE(expected.status == rs::RefStatus::Infeasible);
      REQUIRE(got.status == lp::Status::Infeasible);
      ++infeasible_seen;
    }
  }
  CHECK(infeasible_seen > 10);  // the generator must exercise both outcomes
}

TEST_CASE("warm and cold solves agree across re-solve sequences") {
  Rng rng(77);
  for (int seq = 0; seq < 200; ++seq) {
    const int nvars = 2 + static_cast<int>(rng.below(4));
    TwinLp twin = random_lp(rng, nvars, 2 + static_cast<int>(rng.below(4)));
    twin.model.solve();
    for (int op = 0; op < 4; ++op) {
      if (rng.uniform01() < 0.5) {
        // Tighten one variable's box around a random interior point.
        const int v = static_cast<int>(rng.below(nvars));
        const double lo = twin.ref.lower[v];
        const double hi = twin.ref.upper[v];
        const double a = lo + (hi - lo) * 0.25 * rng.uniform01();
        const double b = hi - (hi - lo) * 0.25 * rng.uniform01();
        twin.set_bounds(v, a, std::max(a, b));
      } else {
        std::vector<std::pair<int, double>> coeffs;
        for (int v = 0; v < nvars; ++v) {
          const double c = std::floor(rng.uniform01() * 7.0) - 3.0;
          if (c != 0.0) coeffs.emplace_back(v, c);
        }
        if (coeffs.empty()) coeffs.emplace_back(0, 1.0);
        twin.add_row(std::move(coeffs),
                     rng.uniform01() < 0.5 ? lp::Sense::LessEqual
                                           : lp::Sense::GreaterEqual,
                     6.0 * rng.uniform01() - 3.0);
      }
      const lp::Solution warm = twin.model.solve();  // resident basis

      lp::Model cold;
      for (std::size_t v = 0; v < twin.ref.lower.size(); ++v)
        cold.add_variable(twin.ref.lower[v], twin.ref.upper[v], twin.ref.cost[v]);
      for (const auto& row : twin.ref.rows) {
        lp::RowDef def;
        def.coeffs = row.coeffs;
        def.sense = row.sense < 0   ? lp::Sense::LessEqual
                    : row.sense > 0 ? lp::Sense::GreaterEqual
                                    : lp::Sense::Equal;
        def.rhs = row.rhs;
        cold.add_row(std::move(def));
      }
      const lp::Solution fresh = cold.solve();
      INFO("sequence ", seq, " op ", op);
      REQUIRE(warm.status == fresh.status);
      if (warm.status == lp::Status::Optimal)
        CHECK(warm.objective ==
              doctest::Approx(fresh.objective).epsilon(1e-7).scale(1.0));
      if (warm.status == lp::Status::Infeasible) break;
    }
  }
}

TEST_CASE("cutting planes and bound tightenings never lower the minimum") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    TwinLp twin = random_lp(rng, 4, 3);
    lp::Solution sol = twin.model.solve();
    if (sol.status != lp::Status::Optimal) continue;
    double previous = sol.objective;
    for (int step = 0; step < 6; ++step) {
      if (rng.uniform01() < 0.5) {
        const int v = static_cast<int>(rng.below(4));
        const double lo = twin.model.lower_bound(v);
        const double hi = twin.model.upper_bound(v);
        const double mid = lo + (hi - lo) * rng.uniform01();
        if (rng.uniform01() < 0.5)
          twin.set_bounds(v, std::min(mid, hi), hi);
        else
          twin.set_bounds(v, lo, std::max(mid, lo));
      } else {
        // A row violated by the current optimum (a genuine cutting plane).
        std::vector<std::pair<int, double>> coeffs;
        double activity = 0.0;
        for (int v = 0; v < 4; ++v) {
          const double c = std::floor(rng.uniform01() * 5.0) - 2.0;
          if (c != 0.0) {
            coeffs.emplace_back(v, c);
            activity += c * sol.values(v);
          }
        }
        if (coeffs.empty()) continue;
        twin.add_row(std::move(coeffs), lp::Sense::GreaterEqual, activity + 0.25);
      }
      sol = twin.model.solve();
      if (sol.status != lp::Status::Optimal) break;
      CHECK(sol.objective >= previous - 1e-7);
      previous = sol.objective;
    }
  }
}

TEST_CASE("root relaxation of a random instance matches the reference") {
  const auto inst = generate_instance(4, 2, preset_error_bound("0.1q"), 3);
  const RealInstance real = to_real(inst);
  lp::Model model;
  const auto layout = relaxation::build_root(real, model);
  REQUIRE(model.num_variables() == 12);
  REQUIRE(model.num_rows() == 32);

  rs::RefProblem ref;
  for (int v = 0; v < model.num_variables(); ++v) {
    ref.lower.push_back(model.lower_bound(v));
    ref.upper.push_back(model.upper_bound(v));
    ref.cost.push_back(v >= 8 ? 1.0 : 0.0);
  }
  auto mirror_rows = [&] {
    ref.rows.clear();
    for (int i = 0; i < model.num_rows(); ++i) {
      rs::RefRow row;
      row.coeffs = model.row(i).coeffs;
      row.sense = model.row(i).sense == lp::Sense::LessEqual ? -1 : 1;
      row.rhs = model.row(i).rhs;
      ref.rows.push_back(row);
    }
  };

  mirror_rows();
  lp::Solution sol = model.solve();
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0).scale(1.0));  // all-off point

  // Drive a few rounds of error-budget cuts and compare each re-solve.
  for (int round = 0; round < 5; ++round) {
    const auto point = relaxation::split_point(layout, sol.values);
    const auto cut = relaxation::separate_error_budget(real, layout, point);
    if (!cut) break;
    model.add_row(*cut);
    sol = model.solve();
    REQUIRE(sol.status == lp::Status::Optimal);
    mirror_rows();
    const rs::RefResult expected = rs::solve_reference(ref);
    REQUIRE(expected.status == rs::RefStatus::Optimal);
    CHECK(sol.objective ==
          doctest::Approx(expected.objective).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("error reporting") {
  lp::Model model;
  const int v = model.add_variable(0.0, 1.0, 1.0);
  CHECK_THROWS_AS(model.set_bounds(v, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(model.set_bounds(7, 0.0, 1.0), std::invalid_argument);
  lp::RowDef bad;
  bad.coeffs = {{5, 1.0}};
  CHECK_THROWS_AS(model.add_row(bad), std::invalid_argument);

  // Conflicting rows on a wide box.
  lp::Model conflict;
  const int w = conflict.add_variable(-5.0, 5.0, 0.0);
  conflict.add_row({{{w, 1.0}}, lp::Sense::GreaterEqual, 1.0});
  conflict.add_row({{{w, 1.0}}, lp::Sense::LessEqual, 0.0});
  CHECK(conflict.solve().status == lp::Status::Infeasible);
}

TEST_CASE("iteration limit yields an explicit non-optimal status") {
  lp::Settings settings;
  settings.max_iterations = 1;
  lp::Model model(settings);
  const int a = model.add_variable(0.0, 10.0, -1.0);
  const int b = model.add_variable(0.0, 10.0, -2.0);
  model.add_row({{{a, 1.0}, {b, 1.0}}, lp::Sense::LessEqual, 3.0});
  model.add_row({{{a, 2.0}, {b, 1.0}}, lp::Sense::LessEqual, 4.0});
  const auto sol = model.solve();
  CHECK(sol.status == lp::Status::IterationLimit);
}

TEST_CASE("basis round-trip warm start") {
  Rng rng(5);
  TwinLp twin = random_lp(rng, 5, 6);
  const auto first = twin.model.solve();
  if (first.status != lp::Status::Optimal) return;
  const lp::Basis basis = twin.model.basis();

  lp::Model clone;
  for (std::size_t v = 0; v < twin.ref.lower.size(); ++v)
    clone.add_variable(twin.ref.lower[v], twin.ref.upper[v], twin.ref.cost[v]);
  for (const auto& row : twin.ref.rows) {
    lp::RowDef def;
    def.coeffs = row.coeffs;
    def.sense = row.sense < 0 ? lp::Sense::LessEqual : lp::Sense::GreaterEqual;
    def.rhs = row.rhs;
    clone.add_row(std::move(def));
  }
  const auto warm = clone.solve(basis);
  REQUIRE(warm.status == lp::Status::Optimal);
  CHECK(warm.objective == doctest::Approx(first.objective).epsilon(1e-9));
  CHECK(warm.iterations <= 4);  // nothing left to do from the optimal basis
}

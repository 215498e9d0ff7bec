// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cmbeam/model.hpp"
#include "cmbeam/rng.hpp"

using namespace cmbeam;
using Complex = std::complex<double>;

namespace {

ProblemInstance tiny(int n, int k, double bound) {
  ProblemInstance inst;
  inst.channel = Eigen::MatrixXcd::Constant(n, k, Complex(1.0, 0.0));
  inst.desired = Eigen::VectorXcd::Constant(k, Complex(1.0, 0.0));
  inst.error_bound = bound;
  return inst;
}

}  // namespace

TEST_CASE("identity channel has zero residual") {
  ProblemInstance inst = tiny(1, 1, 0.5);
  Eigen::VectorXcd x(1);
  x << Complex(1.0, 0.0);
  CHECK(residual(inst, x) == doctest::Approx(0.0));
  const RealInstance real = to_real(inst);
  Eigen::VectorXd w(1), z(1);
  w << 1.0;
  z << 0.0;
  CHECK(squared_error(real, w, z) == doctest::Approx(0.0));
}

TEST_CASE("purely imaginary channel expands as (1+z)^2 + w^2") {
  ProblemInstance inst;
  inst.channel = Eigen::MatrixXcd::Constant(1, 1, Complex(0.0, 1.0));
  inst.desired = Eigen::VectorXcd::Constant(1, Complex(1.0, 0.0));
  inst.error_bound = 1.0;
  const RealInstance real = to_real(inst);
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd w(1), z(1);
    w << 2.0 * rng.uniform01() - 1.0;
    z << 2.0 * rng.uniform01() - 1.0;
    const double expected = (1.0 + z(0)) * (1.0 + z(0)) + w(0) * w(0);
    CHECK(squared_error(real, w, z) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("real and complex residual routes agree") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = generate_instance(4, 2, 0.3, mix_seed({11, (std::uint64_t)trial}));
    const RealInstance real = to_real(inst);
    Eigen::VectorXd w(4), z(4);
    for (int i = 0; i < 4; ++i) {
      w(i) = 2.0 * rng.uniform01() - 1.0;
      z(i) = 2.0 * rng.uniform01() - 1.0;
    }
    Eigen::VectorXcd x(4);
    for (int i = 0; i < 4; ++i) x(i) = Complex(w(i), z(i));
    const double complex_route = residual(inst, x);
    const double real_route = squared_error(real, w, z);
    CHECK(real_route ==
          doctest::Approx(complex_route * complex_route).epsilon(1e-12));
  }
}

TEST_CASE("real reformulation round-trips exactly") {
  const auto inst = generate_instance(5, 3, 0.7, 99);
  const auto back = to_problem(to_real(inst));
  CHECK(back.channel == inst.channel);
  CHECK(back.desired == inst.desired);
  CHECK(back.error_bound == inst.error_bound);
}

TEST_CASE("residual basics") {
  const auto inst = generate_instance(6, 2, 0.4, 123);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(6);
  CHECK(residual(inst, zero) == doctest::Approx(inst.desired.norm()));

  // Consistent system: x solving channel^T x = desired exactly.
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(6);
  x.head(2) = inst.channel.topRows(2).transpose().fullPivLu().solve(inst.desired);
  CHECK(residual(inst, x) == doctest::Approx(0.0).epsilon(1e-9));

  Eigen::VectorXcd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(residual(inst, wrong), std::invalid_argument);
}

TEST_CASE("residual matches a hand expansion for a 2x1 system") {
  ProblemInstance inst;
  inst.channel.resize(2, 1);
  inst.channel << Complex(1.0, 0.0), Complex(0.0, 1.0);
  inst.desired.resize(1);
  inst.desired << Complex(2.0, -1.0);
  inst.error_bound = 1.0;
  Eigen::VectorXcd x(2);
  x << Complex(0.5, 0.25), Complex(-1.0, 0.75);
  // desired - (x0 + i x1) = (2 - i) - (0.5 + 0.25i) - (i(-1 + 0.75i))
  const Complex recv = x(0) + Complex(0.0, 1.0) * x(1);
  const double expected = std::abs(inst.desired(0) - recv);
  CHECK(residual(inst, x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("feasibility checks") {
  const auto inst = generate_instance(4, 2, 10.0, 5);  // generous budget
  CandidateSolution all_off;
  all_off.w.setZero(4);
  all_off.z.setZero(4);
  all_off.active.setZero(4);
  REQUIRE(inst.desired.norm() <= inst.error_bound);
  CHECK(is_feasible(inst, all_off));

  CandidateSolution bad_modulus = all_off;
  bad_modulus.active(1) = 1;
  bad_modulus.w(1) = 0.5;
  bad_modulus.z(1) = 0.5;  // modulus^2 = 0.5
  CHECK_FALSE(is_feasible(inst, bad_modulus));

  CandidateSolution dirty_off = all_off;
  dirty_off.w(2) = 1e-9;  // inactive entries must be exactly zero
  CHECK_FALSE(is_feasible(inst, dirty_off));
}

TEST_CASE("instance generation") {
  const auto a = generate_instance(16, 3, 0.376, 42);
  const auto b = generate_instance(16, 3, 0.376, 42);
  CHECK(a.channel == b.channel);
  CHECK(a.desired == b.desired);

  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(a.desired(k)) == doctest::Approx(kQpskMagnitude).epsilon(1e-12));
  // Single-group multicast: one symbol everywhere, bitwise.
  for (int k = 1; k < 3; ++k) CHECK(a.desired(k) == a.desired(0));

  double acc = 0.0;
  int count = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = generate_instance(100, 10, 1.0, mix_seed({1000, (std::uint64_t)rep}));
    acc += inst.channel.squaredNorm();
    count += 1000;
  }
  CHECK(acc / count == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("preset bounds") {
  CHECK(preset_error_bound("0.1q") == doctest::Approx(std::sqrt(0.1 * 1.414)));
  CHECK(preset_error_bound("0.2q") == doctest::Approx(std::sqrt(0.2 * 1.414)));
  CHECK_THROWS_AS(preset_error_bound("0.3q"), std::invalid_argument);
}

TEST_CASE("instance file round-trip is lossless") {
  const auto inst = generate_instance(5, 2, preset_error_bound("0.1q"), 7);
  const std::string path = "roundtrip_instance.json";
  write_instance(inst, path);
  const auto back = read_instance(path);
  CHECK(back.channel == inst.channel);
  CHECK(back.desired == inst.desired);
  CHECK(back.error_bound == inst.error_bound);
  std::filesystem::remove(path);
}

TEST_CASE("hand-written instance file parses to the expected data") {
  const std::string text = R"({"n": 2, "k": 1, "tol": 0.25,
    "channel": [[[1.0, 0.0]], [[0.0, -2.5]]],
    "desired": [[3.0, 4.0]]})";
  const auto inst = parse_instance(text);
  CHECK(inst.n_antennas() == 2);
  CHECK(inst.n_users() == 1);
  CHECK(inst.error_bound == 0.25);
  CHECK(inst.channel(0, 0) == Complex(1.0, 0.0));
  CHECK(inst.channel(1, 0) == Complex(0.0, -2.5));
  CHECK(inst.desired(0) == Complex(3.0, 4.0));
}

TEST_CASE("malformed instance files are rejected with context") {
  // Row of the wrong arity.
  const std::string short_row = R"({"n": 2, "k": 2, "tol": 0.1,
    "channel": [[[1,0],[2,0]], [[3,0]]],
    "desired": [[1,0],[1,0]]})";
  CHECK_THROWS_WITH_AS(parse_instance(short_row),
                       doctest::Contains("channel row 1"), std::runtime_error);

  CHECK_THROWS_AS(parse_instance("{not json"), std::runtime_error);

  const std::string missing = R"({"n": 1, "k": 1, "channel": [[[1,0]]],
    "desired": [[1,0]]})";
  CHECK_THROWS_WITH_AS(parse_instance(missing), doctest::Contains("tol"),
                       std::runtime_error);
}

TEST_CASE("validate rejects broken instances") {
  ProblemInstance inst = tiny(2, 1, 0.5);
  inst.channel.col(0).setZero();
  CHECK_THROWS_AS(validate(inst), std::invalid_argument);

  ProblemInstance neg = tiny(2, 1, -1.0);
  CHECK_THROWS_AS(validate(neg), std::invalid_argument);
}

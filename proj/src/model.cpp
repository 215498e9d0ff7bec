// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cmbeam/rng.hpp"

namespace cmbeam {

using json = nlohmann::json;

void validate(const ProblemInstance& inst) {
  const int n = inst.n_antennas();
  const int k = inst.n_users();
  if (n < 1 || k < 1)
    throw std::invalid_argument("instance needs at least one antenna and one user");
  if (inst.desired.size() != k)
    throw std::invalid_argument("desired vector length does not match user count");
  for (int j = 0; j < k; ++j) {
    if (inst.channel.col(j).isZero(0.0))
      throw std::invalid_argument("channel column " + std::to_string(j) +
                                  " is all zero");
  }
  if (!(inst.error_bound >= 0.0))
    throw std::invalid_argument("error bound must be nonnegative");
  if (inst.modulus != 1.0)
    throw std::invalid_argument("only unit modulus is supported");
}

RealInstance to_real(const ProblemInstance& inst) {
  RealInstance real;
  real.re_channel = inst.channel.real();
  real.im_channel = inst.channel.imag();
  real.re_desired = inst.desired.real();
  real.im_desired = inst.desired.imag();
  real.error_bound = inst.error_bound;
  return real;
}

ProblemInstance to_problem(const RealInstance& real) {
  ProblemInstance inst;
  inst.channel = real.re_channel.cast<std::complex<double>>() +
                 std::complex<double>(0.0, 1.0) *
                     real.im_channel.cast<std::complex<double>>();
  inst.desired = real.re_desired.cast<std::complex<double>>() +
                 std::complex<double>(0.0, 1.0) *
                     real.im_desired.cast<std::complex<double>>();
  inst.error_bound = real.error_bound;
  inst.modulus = 1.0;
  return inst;
}

double residual(const ProblemInstance& inst,
                const Eigen::Ref<const Eigen::VectorXcd>& x) {
  if (x.size() != inst.n_antennas())
    throw std::invalid_argument("beamformer length does not match antenna count");
  return (inst.desired - inst.channel.transpose() * x).norm();
}

double squared_error(const RealInstance& real,
                     const Eigen::Ref<const Eigen::VectorXd>& w,
                     const Eigen::Ref<const Eigen::VectorXd>& z) {
  // Receive value at user k: (Re h_k . w - Im h_k . z) + i (Re h_k . z + Im h_k . w)
  const Eigen::VectorXd re_recv =
      real.re_channel.transpose() * w - real.im_channel.transpose() * z;
  const Eigen::VectorXd im_recv =
      real.re_channel.transpose() * z + real.im_channel.transpose() * w;
  return (real.re_desired - re_recv).squaredNorm() +
         (real.im_desired - im_recv).squaredNorm();
}

bool is_feasible(const ProblemInstance& inst, const CandidateSolution& sol,
                 double eps) {
  const int n = inst.n_antennas();
  if (sol.w.size() != n || sol.z.size() != n || sol.active.size() != n)
    return false;
  for (int i = 0; i < n; ++i) {
    if (sol.active(i) == 0) {
      if (sol.w(i) != 0.0 || sol.z(i) != 0.0) return false;
    } else if (sol.active(i) == 1) {
      const double mod2 = sol.w(i) * sol.w(i) + sol.z(i) * sol.z(i);
      if (mod2 < 1.0 - eps || mod2 > 1.0 + eps) return false;
    } else {
      return false;
    }
  }
  const ComplexSolution x = to_complex(sol);
  const double err = residual(inst, x.weights);
  return err * err <= inst.delta() * (1.0 + eps);
}

ComplexSolution to_complex(const CandidateSolution& sol) {
  ComplexSolution out;
  out.weights.resize(sol.w.size());
  for (Eigen::Index i = 0; i < sol.w.size(); ++i)
    out.weights(i) = {sol.w(i), sol.z(i)};
  return out;
}

CandidateSolution to_candidate(const ComplexSolution& sol) {
  CandidateSolution out;
  const Eigen::Index n = sol.weights.size();
  out.w.resize(n);
  out.z.resize(n);
  out.active.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.w(i) = sol.weights(i).real();
    out.z(i) = sol.weights(i).imag();
    out.active(i) = sol.weights(i) != std::complex<double>(0.0, 0.0) ? 1 : 0;
  }
  return out;
}

ProblemInstance generate_instance(int n_antennas, int n_users,
                                  double error_bound, std::uint64_t seed) {
  if (n_antennas < 1 || n_users < 1)
    throw std::invalid_argument("instance needs at least one antenna and one user");
  Rng rng(seed);
  ProblemInstance inst;
  inst.channel.resize(n_antennas, n_users);
  for (int j = 0; j < n_users; ++j)
    for (int i = 0; i < n_antennas; ++i) inst.channel(i, j) = rng.complex_normal();

  // One QPSK symbol of magnitude kQpskMagnitude, multicast to every user.
  static const double kQuadrant[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const std::uint64_t m = rng.below(4);
  const double scale = kQpskMagnitude / std::sqrt(2.0);
  const std::complex<double> symbol(scale * kQuadrant[m][0], scale * kQuadrant[m][1]);
  inst.desired = Eigen::VectorXcd::Constant(n_users, symbol);

  inst.error_bound = error_bound;
  inst.modulus = 1.0;
  return inst;
}

double preset_error_bound(std::string_view preset) {
  if (preset == "0.1q") return std::sqrt(0.1 * kQpskMagnitude);
  if (preset == "0.2q") return std::sqrt(0.2 * kQpskMagnitude);
  throw std::invalid_argument("unknown tolerance preset: " + std::string(preset));
}

namespace {

std::complex<double> parse_complex_pair(const json& j, const char* what,
                                        int row, int col) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    std::ostringstream msg;
    msg << what << " entry (" << row << ", " << col
        << ") must be a [re, im] number pair";
    throw std::runtime_error(msg.str());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json dump_complex_pair(const std::complex<double>& v) {
  return json::array({v.real(), v.imag()});
}

}  // namespace

ProblemInstance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("instance parse error: ") + e.what());
  }
  for (const char* field : {"n", "k", "tol", "channel", "desired"}) {
    if (!doc.contains(field))
      throw std::runtime_error(std::string("instance missing field \"") + field + "\"");
  }
  const int n = doc["n"].get<int>();
  const int k = doc["k"].get<int>();
  if (n < 1 || k < 1) throw std::runtime_error("instance fields n, k must be >= 1");

  ProblemInstance inst;
  inst.error_bound = doc["tol"].get<double>();
  const json& channel = doc["channel"];
  if (!channel.is_array() || static_cast<int>(channel.size()) != n)
    throw std::runtime_error("\"channel\" must have n rows");
  inst.channel.resize(n, k);
  for (int i = 0; i < n; ++i) {
    const json& row = channel[i];
    if (!row.is_array() || static_cast<int>(row.size()) != k) {
      std::ostringstream msg;
      msg << "channel row " << i << " must have k = " << k << " entries";
      throw std::runtime_error(msg.str());
    }
    for (int j = 0; j < k; ++j)
      inst.channel(i, j) = parse_complex_pair(row[j], "channel", i, j);
  }
  const json& desired = doc["desired"];
  if (!desired.is_array() || static_cast<int>(desired.size()) != k)
    throw std::runtime_error("\"desired\" must have k entries");
  inst.desired.resize(k);
  for (int j = 0; j < k; ++j)
    inst.desired(j) = parse_complex_pair(desired[j], "desired", 0, j);

  inst.modulus = 1.0;
  validate(inst);
  return inst;
}

std::string dump_instance(const ProblemInstance& inst) {
  json doc;
  doc["n"] = inst.n_antennas();
  doc["k"] = inst.n_users();
  doc["tol"] = inst.error_bound;
  json channel = json::array();
  for (int i = 0; i < inst.n_antennas(); ++i) {
    json row = json::array();
    for (int j = 0; j < inst.n_users(); ++j)
      row.push_back(dump_complex_pair(inst.channel(i, j)));
    channel.push_back(std::move(row));
  }
  doc["channel"] = std::move(channel);
  json desired = json::array();
  for (int j = 0; j < inst.n_users(); ++j)
    desired.push_back(dump_complex_pair(inst.desired(j)));
  doc["desired"] = std::move(desired);
  return doc.dump();
}

ProblemInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << dump_instance(inst) << '\n';
}

}  // namespace cmbeam

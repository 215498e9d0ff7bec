// SPDX-License-Identifier: Apache-2.0
#include "cmbeam/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cmbeam/bnb.hpp"
#include "cmbeam/model.hpp"
#include "cmbeam/rng.hpp"

namespace cmbeam::bench {

double shifted_geometric_mean(const std::vector<double>& values, double shift) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  double acc = 0.0;
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("values must be nonnegative");
    acc += std::log(v + shift);
  }
  return std::exp(acc / static_cast<double>(values.size())) - shift;
}

double geometric_mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  double acc = 0.0;
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("values must be nonnegative");
    if (v == 0.0) return 0.0;
    acc += std::log(v);
  }
  return std::exp(acc / static_cast<double>(values.size()));
}

double arithmetic_mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

bool variant_known(const std::string& name) {
  return name == "default" || name == "modulus" || name == "default+heur" ||
         name == "modulus+heur" || name == "heur";
}

bool variant_runs_exact(const std::string& name) { return name != "heur"; }

bool variant_runs_heuristic(const std::string& name) {
  return name == "heur" || name == "default+heur" || name == "modulus+heur";
}

bool variant_modulus_handler(const std::string& name) {
  return name == "modulus" || name == "modulus+heur";
}

SuiteConfig SuiteConfig::desk() { return SuiteConfig{}; }

SuiteConfig SuiteConfig::full() {
  SuiteConfig config;
  config.n_values = {16, 32, 48, 64};
  config.seeds_per_cell = 2;
  config.variants = {"default", "modulus", "default+heur", "modulus+heur", "heur"};
  config.time_limit_s = 3600.0;
  config.node_limit = -1;
  return config;
}

namespace {

std::string format_time(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  return buf;
}

struct InstanceTask {
  int n = 0;
  int k = 0;
  std::string preset;
  int rep = 0;
  std::uint64_t instance_seed = 0;
};

void run_instance(const SuiteConfig& config, const InstanceTask& task,
                  RunRecord* out) {
  const double bound = preset_error_bound(task.preset);
  const ProblemInstance inst =
      generate_instance(task.n, task.k, bound, task.instance_seed);

  bool need_heur = false;
  for (const auto& v : config.variants) need_heur |= variant_runs_heuristic(v);

  heuristic::Result heur;
  if (need_heur) {
    heuristic::Config hc = config.heuristic_config;
    hc.seed = mix_seed({task.instance_seed, 0x68657572ULL});
    heur = heuristic::solve(inst, hc);
  }

  std::ostringstream id;
  id << "N" << task.n << "_K" << task.k << "_" << task.preset << "_s" << task.rep;

  for (std::size_t vi = 0; vi < config.variants.size(); ++vi) {
    const std::string& variant = config.variants[vi];
    RunRecord rec;
    rec.instance_id = id.str();
    rec.n = task.n;
    rec.k = task.k;
    rec.preset = task.preset;
    rec.seed = static_cast<std::uint64_t>(task.rep);
    rec.variant = variant;

    const bool with_heur = variant_runs_heuristic(variant);
    if (with_heur) {
      rec.heur_card = heur.feasible ? heur.cardinality : -1;
      rec.heur_time_s = heur.time_s;
    }
    if (!variant_runs_exact(variant)) {
      rec.status = heur.feasible ? "feasible" : "failed";
      rec.time_s = heur.time_s;
      out[vi] = std::move(rec);
      continue;
    }

    bnb::SolveConfig sc;
    sc.time_limit_s = config.time_limit_s;
    sc.modulus_handler = variant_modulus_handler(variant);
    sc.node_limit = config.node_limit;
    if (with_heur && heur.feasible)
      sc.initial_solution = to_candidate(heur.solution);
    const bnb::SolveReport report = bnb::solve_exact(inst, sc);

    rec.nodes = report.nodes;
    rec.time_s = report.wall_time_s + (with_heur ? heur.time_s : 0.0);
    switch (report.status) {
      case bnb::SolveStatus::Optimal: rec.status = "optimal"; break;
      case bnb::SolveStatus::TimeLimit: rec.status = "time-limit"; break;
      case bnb::SolveStatus::Infeasible: rec.status = "infeasible"; break;
    }
    rec.opt_card = report.best_cardinality;
    out[vi] = std::move(rec);
  }
}

}  // namespace

std::vector<RunRecord> run_suite(const SuiteConfig& config, std::ostream* progress) {
  for (const auto& v : config.variants)
    if (!variant_known(v)) throw std::invalid_argument("unknown variant: " + v);

  std::vector<InstanceTask> tasks;
  for (int n : config.n_values) {
    for (int k : config.k_values) {
      for (const auto& preset : config.presets) {
        const double bound = preset_error_bound(preset);
        for (int rep = 0; rep < config.seeds_per_cell; ++rep) {
          InstanceTask task;
          task.n = n;
          task.k = k;
          task.preset = preset;
          task.rep = rep;
          task.instance_seed =
              mix_seed({config.master_seed, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(k),
                        std::bit_cast<std::uint64_t>(bound),
                        static_cast<std::uint64_t>(rep)});
          tasks.push_back(std::move(task));
        }
      }
    }
  }

  const std::size_t per_task = config.variants.size();
  std::vector<RunRecord> records(tasks.size() * per_task);

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      run_instance(config, tasks[i], records.data() + i * per_task);
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        *progress << "[" << (i + 1) << "/" << tasks.size() << "] "
                  << records[i * per_task].instance_id << " done\n";
        progress->flush();
      }
    }
  };

  const int workers = std::max(1, config.workers);
  if (workers == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<std::size_t>(workers, tasks.size()); ++t)
      pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "instance,N,K,preset,seed,variant,nodes,time_s,status,opt_card,"
         "heur_card,heur_time_s\n";
  for (const auto& r : records) {
    out << r.instance_id << ',' << r.n << ',' << r.k << ',' << r.preset << ','
        << r.seed << ',' << r.variant << ',';
    if (r.nodes >= 0) out << r.nodes;
    out << ',' << format_time(r.time_s) << ',' << r.status << ',';
    if (r.opt_card >= 0) out << r.opt_card;
    out << ',';
    if (r.heur_card >= 0) out << r.heur_card;
    out << ',';
    if (r.heur_time_s >= 0.0) out << format_time(r.heur_time_s);
    out << '\n';
  }
  return out.str();
}

std::vector<RunRecord> parse_csv(const std::string& text) {
  std::vector<RunRecord> records;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 12)
      throw std::runtime_error("malformed benchmark CSV line: " + line);
    RunRecord r;
    r.instance_id = fields[0];
    r.n = std::stoi(fields[1]);
    r.k = std::stoi(fields[2]);
    r.preset = fields[3];
    r.seed = std::stoull(fields[4]);
    r.variant = fields[5];
    r.nodes = fields[6].empty() ? -1 : std::stoll(fields[6]);
    r.time_s = std::stod(fields[7]);
    r.status = fields[8];
    r.opt_card = fields[9].empty() ? -1 : std::stoi(fields[9]);
    r.heur_card = fields[10].empty() ? -1 : std::stoi(fields[10]);
    r.heur_time_s = fields[11].empty() ? -1.0 : std::stod(fields[11]);
    records.push_back(std::move(r));
  }
  return records;
}

void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << to_csv(records);
}

std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string summary_block(const std::vector<RunRecord>& records) {
  std::vector<std::string> variants;
  for (const auto& r : records)
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end())
      variants.push_back(r.variant);

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %10s %10s %10s %10s %10s %10s\n",
                "variant", "geo-nodes", "sgm-nodes", "avg-nodes", "geo-time",
                "sgm-time", "avg-time");
  out << buf;
  for (const auto& variant : variants) {
    std::vector<double> nodes, times;
    for (const auto& r : records) {
      if (r.variant != variant) continue;
      if (r.nodes >= 0) nodes.push_back(static_cast<double>(r.nodes));
      times.push_back(r.time_s);
    }
    if (nodes.empty()) {
      std::snprintf(buf, sizeof(buf), "%-14s %10s %10s %10s %10.2f %10.2f %10.2f\n",
                    variant.c_str(), "-", "-", "-", geometric_mean(times),
                    shifted_geometric_mean(times, 10.0), arithmetic_mean(times));
    } else {
      std::snprintf(buf, sizeof(buf),
                    "%-14s %10.1f %10.1f %10.1f %10.2f %10.2f %10.2f\n",
                    variant.c_str(), geometric_mean(nodes),
                    shifted_geometric_mean(nodes, 100.0), arithmetic_mean(nodes),
                    geometric_mean(times), shifted_geometric_mean(times, 10.0),
                    arithmetic_mean(times));
    }
    out << buf;
  }
  return out.str();
}

}  // namespace cmbeam::bench

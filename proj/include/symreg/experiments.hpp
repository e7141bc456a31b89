#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symreg/benchmarks.hpp"
#include "symreg/config.hpp"

namespace symreg {

struct PairResult {
  std::string benchmark;
  int run = 0;
  std::uint64_t seed = 0;
  double noise_level = 0.0;
  bool recovered = false;  // best expression strictly equivalent to the target
  bool threshold_reached = false;
  std::string best_infix;
  double reward = 0.0;
  std::optional<double> r_squared;  // on a fresh noiseless test sample
  int episodes = 0;
  long simulations = 0;
  double mean_policy_entropy = 0.0;
  double wall_seconds = 0.0;
};

/// One independent search: sample (seeded by root seed, benchmark, run), add
/// noise, search, then check equivalence and test R^2.
PairResult run_pair(const BenchmarkSpec& spec, int run, std::uint64_t root_seed,
                    double noise_level, const AppConfig& cfg);

/// Every (benchmark, run) pair, spread over cfg.bench.threads workers.
/// Results come back in (benchmark, run) order whatever the thread count.
std::vector<PairResult> run_pairs(const std::vector<const BenchmarkSpec*>& specs, int runs,
                                  std::uint64_t root_seed, double noise_level,
                                  const AppConfig& cfg);

/// Copy of cfg with the named components off: "entropy" (loss term),
/// "constraints" (masks except length feasibility), "snrmse" (lambda = 0).
/// "feasibility" and unknown names throw UsageError.
AppConfig ablated(const AppConfig& cfg, const std::vector<std::string>& disable);

struct BenchRequest {
  std::string suite = "nguyen-mini";
  int runs = 5;
  std::uint64_t seed = 0;
};

/// Reports are timing-free so that a fixed seed reproduces them byte for
/// byte; wall times go to timing_report.
nlohmann::json bench_report(const BenchRequest& req, const AppConfig& cfg,
                            const std::vector<PairResult>& rows);
nlohmann::json noise_report(const BenchRequest& req, const AppConfig& cfg,
                            const std::vector<double>& levels,
                            const std::vector<std::vector<PairResult>>& per_level);
nlohmann::json ablate_report(const BenchRequest& req, const AppConfig& cfg,
                             const std::vector<std::string>& disabled,
                             const std::vector<PairResult>& baseline,
                             const std::vector<PairResult>& ablation);
nlohmann::json timing_report(const std::vector<PairResult>& rows);

nlohmann::json solve_report(const std::string& data_path, const Dataset& data,
                            const AppConfig& cfg, const SearchResult& result);

/// Report JSON as written to disk: two-space indent, trailing newline.
std::string dump_report(const nlohmann::json& report);

}  // namespace symreg

#include "symreg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "symreg/errors.hpp"
#include "symreg/objective.hpp"

namespace symreg {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json row_json(const PairResult& r) {
  return {{"benchmark", r.benchmark},
          {"run", r.run},
          {"seed", r.seed},
          {"noise_level", r.noise_level},
          {"recovered", r.recovered},
          {"threshold_reached", r.threshold_reached},
          {"best_infix", r.best_infix},
          {"reward", r.reward},
          {"r_squared", optional_number(r.r_squared)},
          {"episodes", r.episodes},
          {"simulations", r.simulations},
          {"mean_policy_entropy", r.mean_policy_entropy}};
}

struct Tally {
  int runs = 0;
  int recovered = 0;
  double r2_sum = 0.0;
  int r2_count = 0;
  double episodes = 0.0;
  double entropy = 0.0;

  void add(const PairResult& r) {
    ++runs;
    recovered += r.recovered ? 1 : 0;
    if (r.r_squared) {
      r2_sum += *r.r_squared;
      ++r2_count;
    }
    episodes += r.episodes;
    entropy += r.mean_policy_entropy;
  }

  json to_json() const {
    json j;
    j["runs"] = runs;
    j["recovered"] = recovered;
    j["recovery_rate"] = runs > 0 ? json(static_cast<double>(recovered) / runs) : json(nullptr);
    j["mean_r_squared"] = r2_count > 0 ? json(r2_sum / r2_count) : json(nullptr);
    j["mean_episodes"] = runs > 0 ? json(episodes / runs) : json(nullptr);
    j["mean_policy_entropy"] = runs > 0 ? json(entropy / runs) : json(nullptr);
    return j;
  }
};

// Rows plus per-benchmark aggregates (first-seen order) and an overall summary.
json results_block(const std::vector<PairResult>& rows) {
  json out;
  out["rows"] = json::array();
  std::vector<std::pair<std::string, Tally>> per;
  Tally all;
  for (const auto& r : rows) {
    out["rows"].push_back(row_json(r));
    auto it = std::find_if(per.begin(), per.end(), [&](const auto& p) { return p.first == r.benchmark; });
    if (it == per.end()) {
      per.emplace_back(r.benchmark, Tally{});
      it = per.end() - 1;
    }
    it->second.add(r);
    all.add(r);
  }
  out["aggregates"] = json::array();
  for (const auto& [name, t] : per) {
    json a = t.to_json();
    a["benchmark"] = name;
    out["aggregates"].push_back(a);
  }
  out["summary"] = all.to_json();
  return out;
}

json header(const std::string& command, const BenchRequest& req, const AppConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["suite"] = req.suite;
  j["runs"] = req.runs;
  j["seed"] = req.seed;
  j["config"] = config_to_json(cfg);
  return j;
}

}  // namespace

PairResult run_pair(const BenchmarkSpec& spec, int run, std::uint64_t root_seed,
                    double noise_level, const AppConfig& cfg) {
  PairResult r;
  r.benchmark = spec.name;
  r.run = run;
  r.seed = derive_seed(root_seed, spec.name, static_cast<std::uint64_t>(run));
  r.noise_level = noise_level;

  Dataset data = sample_dataset(spec, r.seed);
  if (noise_level > 0.0) {
    Rng noise_rng(derive_seed(r.seed, "noise"));
    data.y = add_noise(data.y, noise_level, noise_rng);
  }
  data.provenance += " noise=" + format_number(noise_level);

  SearchConfig sc = cfg.search;
  sc.run.seed = derive_seed(r.seed, "search");
  const Vocabulary vocab = spec.vocabulary();
  const SearchResult res = run_search(data, vocab, sc);

  r.threshold_reached = res.threshold_reached;
  r.episodes = res.episodes;
  r.simulations = res.simulations;
  r.mean_policy_entropy = res.mean_policy_entropy;
  r.wall_seconds = res.wall_seconds;
  if (!res.best.empty()) {
    r.best_infix = res.best.infix;
    r.reward = res.best_z;
    const Expression found = make_expression(res.best.tokens, res.best.constants);
    const Expression target = spec.target();
    Rng probe(derive_seed(r.seed, "probe"));
    r.recovered = symbolically_equivalent(found, target, spec.box(), probe);
    const Dataset test = sample_dataset(spec, derive_seed(r.seed, "test"));
    if (auto y_hat = evaluate(found.tree, test.X, found.constants)) {
      r.r_squared = r_squared(test.y, *y_hat);
    }
  }
  return r;
}

std::vector<PairResult> run_pairs(const std::vector<const BenchmarkSpec*>& specs, int runs,
                                  std::uint64_t root_seed, double noise_level,
                                  const AppConfig& cfg) {
  if (runs < 0) throw UsageError("runs must be >= 0");
  const std::size_t total = specs.size() * static_cast<std::size_t>(runs);
  std::vector<PairResult> out(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        out[i] = run_pair(*specs[i / static_cast<std::size_t>(runs)],
                          static_cast<int>(i % static_cast<std::size_t>(runs)), root_seed,
                          noise_level, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.bench.threads), std::max<std::size_t>(total, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

AppConfig ablated(const AppConfig& cfg, const std::vector<std::string>& disable) {
  AppConfig out = cfg;
  for (const auto& flag : disable) {
    if (flag == "entropy") {
      out.search.model.entropy_term = false;
    } else if (flag == "constraints") {
      out.search.mcts.constraints =
          ConstraintConfig::feasibility_only(cfg.search.mcts.constraints.max_length);
    } else if (flag == "snrmse") {
      out.search.objective.lambda = 0.0;
    } else if (flag == "feasibility") {
      throw UsageError("length feasibility masking cannot be disabled: it guarantees termination");
    } else {
      throw UsageError("unknown ablation '" + flag + "' (expected entropy, constraints, snrmse)");
    }
  }
  return out;
}

json bench_report(const BenchRequest& req, const AppConfig& cfg,
                  const std::vector<PairResult>& rows) {
  json j = header("bench", req, cfg);
  j.update(results_block(rows));
  return j;
}

json noise_report(const BenchRequest& req, const AppConfig& cfg, const std::vector<double>& levels,
                  const std::vector<std::vector<PairResult>>& per_level) {
  json j = header("noise", req, cfg);
  j["levels"] = json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    json block = results_block(per_level[i]);
    block["noise_level"] = levels[i];
    j["levels"].push_back(block);
  }
  return j;
}

json ablate_report(const BenchRequest& req, const AppConfig& cfg,
                   const std::vector<std::string>& disabled,
                   const std::vector<PairResult>& baseline,
                   const std::vector<PairResult>& ablation) {
  json j = header("ablate", req, cfg);
  j["disabled"] = disabled;
  json base = results_block(baseline);
  base["name"] = "baseline";
  json abl = results_block(ablation);
  abl["name"] = "ablated";
  abl["config"] = config_to_json(ablated(cfg, disabled));
  j["variants"] = json::array({base, abl});
  return j;
}

json timing_report(const std::vector<PairResult>& rows) {
  json j;
  j["rows"] = json::array();
  std::vector<std::pair<std::string, std::pair<double, int>>> per;
  double total = 0.0;
  for (const auto& r : rows) {
    j["rows"].push_back({{"benchmark", r.benchmark},
                         {"run", r.run},
                         {"noise_level", r.noise_level},
                         {"wall_seconds", r.wall_seconds}});
    auto it = std::find_if(per.begin(), per.end(), [&](const auto& p) { return p.first == r.benchmark; });
    if (it == per.end()) {
      per.push_back({r.benchmark, {0.0, 0}});
      it = per.end() - 1;
    }
    it->second.first += r.wall_seconds;
    ++it->second.second;
    total += r.wall_seconds;
  }
  j["mean_wall_seconds"] = json::array();
  for (const auto& [name, acc] : per) {
    j["mean_wall_seconds"].push_back(
        {{"benchmark", name}, {"mean_wall_seconds", acc.first / acc.second}});
  }
  j["total_wall_seconds"] = total;
  return j;
}

json solve_report(const std::string& data_path, const Dataset& data, const AppConfig& cfg,
                  const SearchResult& result) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "solve";
  j["data"] = {{"path", data_path}, {"rows", data.rows()}, {"columns", data.n_variables()}};
  j["config"] = config_to_json(cfg);
  j["seed"] = cfg.search.run.seed;
  j["threshold_reached"] = result.threshold_reached;
  j["budget_exhausted"] = result.budget_exhausted;
  j["episodes"] = result.episodes;
  j["simulations"] = result.simulations;
  j["train_steps"] = result.train_steps;
  j["mean_policy_entropy"] = result.mean_policy_entropy;
  j["wall_seconds"] = result.wall_seconds;
  if (result.best.empty()) {
    j["best"] = nullptr;
  } else {
    const Expression e = make_expression(result.best.tokens, result.best.constants);
    json tokens = json::array();
    for (const auto& t : result.best.tokens) tokens.push_back(t.name());
    std::optional<double> r2;
    if (auto y_hat = evaluate(e.tree, data.X, e.constants)) r2 = r_squared(data.y, *y_hat);
    j["best"] = {{"infix", result.best.infix},
                 {"tokens", tokens},
                 {"constants", result.best.constants},
                 {"reward", result.best_z},
                 {"nrmse", result.best.metrics.nrmse},
                 {"s_nrmse", result.best.metrics.s_nrmse},
                 {"r_squared", optional_number(r2)}};
  }
  return j;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

}  // namespace symreg

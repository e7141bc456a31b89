// symreg: command-line front end (solve, bench, noise, ablate, registry list).
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symreg/benchmarks.hpp"
#include "symreg/config.hpp"
#include "symreg/csv.hpp"
#include "symreg/errors.hpp"
#include "symreg/experiments.hpp"

using namespace symreg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBudget = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int runs = 5;
  std::string out;
  std::string trace;
  std::string suite = "nguyen-mini";
  std::string levels = "0,0.05,0.1";
  std::string disable;
  std::string data;
  std::string registry;
  std::optional<int> threads;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_levels(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError("bad noise level '" + item + "'");
    if (!(v >= 0.0 && v <= 0.1)) {
      throw UsageError("noise level " + item + " outside [0, 0.1]");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--levels needs at least one value");
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

void emit(const Options& o, const nlohmann::json& report) {
  if (o.out.empty()) {
    std::cout << dump_report(report);
  } else {
    write_file(o.out, dump_report(report));
  }
}

void emit_timing(const Options& o, const std::vector<PairResult>& rows) {
  if (!o.out.empty()) write_file(o.out + ".timing.json", dump_report(timing_report(rows)));
}

AppConfig make_config(const Options& o) {
  AppConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.seed) cfg.search.run.seed = *o.seed;
  if (o.threads) cfg.bench.threads = *o.threads;
  cfg.validate();
  return cfg;
}

Registry make_registry(const Options& o) {
  return o.registry.empty() ? Registry::builtin() : Registry::load(o.registry);
}

BenchRequest make_request(const Options& o, const AppConfig& cfg) {
  if (o.runs < 0) throw UsageError("--runs must be >= 0");
  return BenchRequest{o.suite, o.runs, o.seed ? *o.seed : cfg.search.run.seed};
}

int cmd_solve(const Options& o) {
  if (o.data.empty()) throw UsageError("solve needs --data <csv>");
  const AppConfig cfg = make_config(o);
  const Dataset data = read_csv(o.data);
  const Vocabulary vocab =
      Vocabulary::make(cfg.library.operators, data.n_variables(), cfg.library.constant);
  const SearchResult result = run_search(data, vocab, cfg.search);
  emit(o, solve_report(o.data, data, cfg, result));
  std::string trace_path = o.trace;
  if (trace_path.empty() && !o.out.empty()) trace_path = o.out + ".trace.csv";
  if (!trace_path.empty()) {
    std::ostringstream csv;
    csv << "episode_index,reward,running_best,wall_seconds\n";
    for (const auto& t : result.trace) {
      csv << t.episode_index << ',' << format_number(t.reward) << ','
          << format_number(t.running_best) << ',' << format_number(t.wall_seconds) << '\n';
    }
    write_file(trace_path, csv.str());
  }
  if (!result.best.empty()) std::cerr << "best: " << result.best.infix << "  reward " << result.best_z << "\n";
  return result.threshold_reached ? kExitOk : kExitBudget;
}

int cmd_bench(const Options& o) {
  const AppConfig cfg = make_config(o);
  const Registry reg = make_registry(o);
  const BenchRequest req = make_request(o, cfg);
  const auto specs = reg.suite(req.suite);
  const auto rows = run_pairs(specs, req.runs, req.seed, 0.0, cfg);
  emit(o, bench_report(req, cfg, rows));
  emit_timing(o, rows);
  return kExitOk;
}

int cmd_noise(const Options& o) {
  const AppConfig cfg = make_config(o);
  const Registry reg = make_registry(o);
  const BenchRequest req = make_request(o, cfg);
  const auto levels = parse_levels(o.levels);
  const auto specs = reg.suite(req.suite);
  std::vector<std::vector<PairResult>> per_level;
  std::vector<PairResult> all;
  for (double level : levels) {
    per_level.push_back(run_pairs(specs, req.runs, req.seed, level, cfg));
    all.insert(all.end(), per_level.back().begin(), per_level.back().end());
  }
  emit(o, noise_report(req, cfg, levels, per_level));
  emit_timing(o, all);
  return kExitOk;
}

int cmd_ablate(const Options& o) {
  const AppConfig cfg = make_config(o);
  const auto disabled = split_list(o.disable);
  const AppConfig variant = ablated(cfg, disabled);
  const Registry reg = make_registry(o);
  const BenchRequest req = make_request(o, cfg);
  const auto specs = reg.suite(req.suite);
  const auto baseline = run_pairs(specs, req.runs, req.seed, 0.0, cfg);
  const auto ablation = run_pairs(specs, req.runs, req.seed, 0.0, variant);
  emit(o, ablate_report(req, cfg, disabled, baseline, ablation));
  std::vector<PairResult> all = baseline;
  all.insert(all.end(), ablation.begin(), ablation.end());
  emit_timing(o, all);
  return kExitOk;
}

int cmd_registry_list(const Options& o, bool all_suites) {
  const Registry reg = make_registry(o);
  std::vector<const BenchmarkSpec*> specs;
  if (all_suites) {
    for (const auto& s : reg.all()) specs.push_back(&s);
  } else {
    specs = reg.suite(o.suite);
  }
  for (const auto* s : specs) {
    std::string suites;
    for (const auto& n : s->suites) suites += (suites.empty() ? "" : ",") + n;
    std::printf("%-18s %-22s %c(%g, %g, %d)  %s%s\n", s->name.c_str(), suites.c_str(),
                s->sampling.kind, s->sampling.low, s->sampling.high, s->sampling.count,
                s->infix.c_str(), s->unsupported ? "  [unsupported]" : "");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic regression by policy-guided tree search"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file");
    sub->add_option("--seed", o.seed, "root seed (overrides run.seed)");
    sub->add_option("--out", o.out, "report JSON path (stdout if omitted)");
  };
  auto add_bench = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--suite", o.suite, "registry suite")->capture_default_str();
    sub->add_option("--runs", o.runs, "runs per benchmark")->capture_default_str();
    sub->add_option("--threads", o.threads, "concurrent (benchmark, run) pairs");
    sub->add_option("--registry", o.registry, "registry JSON instead of the built-in one");
  };

  auto* solve = app.add_subcommand("solve", "search a CSV dataset (header x1,...,xm,y)");
  add_common(solve);
  solve->add_option("--data", o.data, "input CSV")->required();
  solve->add_option("--trace", o.trace, "reward-trace CSV (default <out>.trace.csv)");

  auto* bench = app.add_subcommand("bench", "recovery benchmark over a registry suite");
  add_bench(bench);

  auto* noise = app.add_subcommand("noise", "recovery versus noise level");
  add_bench(noise);
  noise->add_option("--levels", o.levels, "comma-separated levels in [0, 0.1]")->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "baseline versus components disabled");
  add_bench(ablate);
  ablate->add_option("--disable", o.disable, "comma-separated: entropy,constraints,snrmse");

  auto* registry = app.add_subcommand("registry", "benchmark registry");
  registry->require_subcommand(1);
  auto* list = registry->add_subcommand("list", "list benchmarks");
  bool list_suite = false;
  list->add_option("--suite", o.suite, "only this suite")->each([&](const std::string&) { list_suite = true; });
  list->add_option("--registry", o.registry, "registry JSON instead of the built-in one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*bench) return cmd_bench(o);
    if (*noise) return cmd_noise(o);
    if (*ablate) return cmd_ablate(o);
    if (*list) return cmd_registry_list(o, !list_suite);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

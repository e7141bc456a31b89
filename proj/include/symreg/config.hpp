#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "symreg/self_search.hpp"
#include "symreg/tokens.hpp"

namespace symreg {

/// Library used by `solve` (benchmarks carry their own).
struct LibrarySettings {
  std::vector<Symbol> operators{Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div, Symbol::Sin,
                                Symbol::Cos, Symbol::Exp, Symbol::Sqrt, Symbol::Log};
  bool constant = true;
};

struct BenchSettings {
  int threads = 1;  // concurrent (benchmark, run) pairs
};

struct AppConfig {
  SearchConfig search;
  LibrarySettings library;
  BenchSettings bench;

  void validate() const;
};

/// Overlays `doc` onto `base`. Unknown sections or keys throw UsageError so a
/// typo never silently falls back to a default.
AppConfig apply_config(const nlohmann::json& doc, AppConfig base = {});
AppConfig parse_config(std::string_view json_text, AppConfig base = {});
/// Missing or unreadable file: DataError; bad content: UsageError.
AppConfig load_config(const std::string& path, AppConfig base = {});

/// Every setting, in the same layout apply_config reads.
nlohmann::json config_to_json(const AppConfig& cfg);

}  // namespace symreg

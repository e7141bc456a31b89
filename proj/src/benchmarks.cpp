#include "symreg/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "registry_data.hpp"
#include "symreg/errors.hpp"

namespace symreg {

namespace {

constexpr Symbol kBase[] = {Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div, Symbol::Sin,
                            Symbol::Cos, Symbol::Log, Symbol::Exp, Symbol::Sqrt};

int variable_index(const std::string& name) {
  auto t = token_from_name(name);
  if (t && t->symbol == Symbol::Var) return t->var;
  return -1;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

bool point_valid(const Expression& e, const Eigen::MatrixXd& row, double& out) {
  auto v = evaluate(e.tree, row, e.constants);
  if (!v) return false;
  out = (*v)(0);
  return true;
}

}  // namespace

void BenchmarkSpec::validate() const {
  if (name.empty()) throw UsageError("benchmark without a name");
  if (sampling.kind != 'U' && sampling.kind != 'E') {
    throw UsageError(name + ": sampling kind must be U or E");
  }
  if (sampling.count < 2) throw UsageError(name + ": sampling count must be >= 2");
  if (!(sampling.low < sampling.high)) throw UsageError(name + ": sampling low must be < high");
  for (const auto& ext : library_extensions) {
    auto t = token_from_name(ext);
    if (!t || (t->kind() != TokenKind::Variable && t->kind() != TokenKind::Constant &&
               t->symbol != Symbol::Pow)) {
      throw UsageError(name + ": unknown library extension '" + ext + "'");
    }
  }
  for (const auto& rem : library_removals) {
    if (!token_from_name(rem)) throw UsageError(name + ": unknown library removal '" + rem + "'");
  }
  if (!unsupported) (void)target();
}

Expression BenchmarkSpec::target() const {
  if (unsupported) throw UsageError(name + " is marked unsupported");
  return parse_infix(infix);
}

int BenchmarkSpec::n_variables() const {
  int n = 1;
  for (const auto& ext : library_extensions) n = std::max(n, variable_index(ext) + 1);
  if (!unsupported) n = std::max(n, target().tree.max_variable() + 1);
  return n;
}

Vocabulary BenchmarkSpec::vocabulary() const {
  std::set<Symbol> removed;
  for (const auto& r : library_removals) removed.insert(token_from_name(r)->symbol);
  bool pow = false;
  bool constant = false;
  for (const auto& ext : library_extensions) {
    const Token t = *token_from_name(ext);
    if (t.symbol == Symbol::Pow) pow = true;
    if (t.symbol == Symbol::Const) constant = true;
  }
  std::vector<Symbol> ops;
  for (Symbol s : kBase) {
    if (!removed.count(s)) ops.push_back(s);
  }
  if (pow && !removed.count(Symbol::Pow)) ops.insert(ops.begin() + 4, Symbol::Pow);
  return Vocabulary::make(ops, n_variables(), constant);
}

std::vector<Interval> BenchmarkSpec::box() const {
  return std::vector<Interval>(static_cast<std::size_t>(n_variables()),
                               Interval{sampling.low, sampling.high});
}

Registry Registry::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("registry: ") + e.what());
  }
  Registry reg;
  std::set<std::string> names;
  try {
    for (const auto& b : doc.at("benchmarks")) {
      BenchmarkSpec s;
      s.name = b.at("name").get<std::string>();
      s.infix = b.at("infix").get<std::string>();
      if (b.contains("suites")) s.suites = b["suites"].get<std::vector<std::string>>();
      if (b.contains("suite")) s.suites.push_back(b["suite"].get<std::string>());
      const auto& sm = b.at("sampling");
      const std::string kind = sm.at("kind").get<std::string>();
      s.sampling.kind = kind.size() == 1 ? kind[0] : '?';
      s.sampling.low = sm.at("low").get<double>();
      s.sampling.high = sm.at("high").get<double>();
      s.sampling.count = sm.at("count").get<int>();
      s.library_extensions = b.value("library_extensions", std::vector<std::string>{});
      s.library_removals = b.value("library_removals", std::vector<std::string>{});
      s.unsupported = b.value("unsupported", false);
      s.note = b.value("note", std::string{});
      s.validate();
      if (!names.insert(s.name).second) throw DataError("registry: duplicate name " + s.name);
      reg.specs_.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("registry: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("registry: ") + e.what());
  } catch (const StructuralError& e) {
    throw DataError(std::string("registry: ") + e.what());
  }
  return reg;
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open registry " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const Registry& Registry::builtin() {
  static const Registry reg = from_json(detail::kRegistryJson);
  return reg;
}

const BenchmarkSpec& Registry::get(std::string_view name) const {
  for (const auto& s : specs_) {
    if (s.name == name) return s;
  }
  throw UsageError("unknown benchmark '" + std::string(name) + "'");
}

std::vector<const BenchmarkSpec*> Registry::suite(std::string_view name) const {
  std::vector<const BenchmarkSpec*> out;
  bool known = false;
  for (const auto& s : specs_) {
    if (std::find(s.suites.begin(), s.suites.end(), name) == s.suites.end()) continue;
    known = true;
    if (!s.unsupported) out.push_back(&s);
  }
  if (!known) {
    throw UsageError("unknown suite '" + std::string(name) + "'; available: " +
                     join(suite_names()));
  }
  return out;
}

std::vector<std::string> Registry::suite_names() const {
  std::vector<std::string> out;
  for (const auto& s : specs_) {
    for (const auto& n : s.suites) {
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
  }
  return out;
}

Dataset sample_dataset(const BenchmarkSpec& spec, std::uint64_t seed) {
  const Expression target = spec.target();
  const int m = spec.n_variables();
  const int n = spec.sampling.count;
  Dataset d;
  d.X.resize(n, m);
  d.y.resize(n);
  const double lo = spec.sampling.low;
  const double hi = spec.sampling.high;
  Rng rng(derive_seed(seed, "dataset"));
  Eigen::MatrixXd row(1, m);
  for (int i = 0; i < n; ++i) {
    double y = 0.0;
    bool ok = false;
    if (spec.sampling.kind == 'E') {
      const double x = i == n - 1 ? hi : lo + (hi - lo) * i / static_cast<double>(n - 1);
      row.setConstant(x);
      ok = point_valid(target, row, y);
      if (!ok) {
        throw DataError(spec.name + ": target undefined at grid point " + format_number(x));
      }
    } else {
      for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
        for (int j = 0; j < m; ++j) row(0, j) = rng.uniform(lo, hi);
        ok = point_valid(target, row, y);
      }
      if (!ok) throw DataError(spec.name + ": no valid sample point found in the domain");
    }
    d.X.row(i) = row.row(0);
    d.y(i) = y;
  }
  d.provenance = spec.name + " seed=" + std::to_string(seed);
  return d;
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& y, double level, Rng& rng) {
  if (!(level >= 0.0)) throw UsageError("noise level must be >= 0");
  Eigen::VectorXd out = y;
  if (y.size() == 0) return out;
  const double scale = y.maxCoeff() - y.minCoeff();
  const double half = level * scale;
  if (half == 0.0) return out;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += rng.uniform(-half, half);
  return out;
}

EquivalenceResult check_equivalence(const Expression& a, const Expression& b,
                                    const std::vector<Interval>& box, Rng& rng) {
  EquivalenceResult r;
  if (canonical_equal(canonicalize(a.tree, a.constants), canonicalize(b.tree, b.constants))) {
    r.equivalent = true;
    r.canonical_match = true;
    return r;
  }
  const int m = std::max({a.tree.max_variable() + 1, b.tree.max_variable() + 1, 1});
  Eigen::MatrixXd row(1, m);
  for (int p = 0; p < kProbePoints; ++p) {
    for (int j = 0; j < m; ++j) {
      const Interval iv = j < static_cast<int>(box.size()) ? box[static_cast<std::size_t>(j)]
                                                            : (box.empty() ? Interval{-1.0, 1.0}
                                                                           : box.back());
      row(0, j) = rng.uniform(iv.first, iv.second);
    }
    double ea = 0.0;
    double eb = 0.0;
    if (!point_valid(a, row, ea) || !point_valid(b, row, eb)) continue;
    ++r.valid_points;
    if (std::abs(ea - eb) > 1e-9 * (1.0 + std::abs(ea))) return r;
  }
  if (r.valid_points < kMinValidProbePoints) {
    r.inconclusive = true;
    return r;
  }
  r.equivalent = true;
  return r;
}

bool symbolically_equivalent(const Expression& a, const Expression& b,
                             const std::vector<Interval>& box, Rng& rng) {
  return check_equivalence(a, b, box, rng).equivalent;
}

double recovery_rate(const std::vector<bool>& results) {
  if (results.empty()) throw UsageError("recovery_rate: empty result list");
  const auto hits = std::count(results.begin(), results.end(), true);
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::optional<double> r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() < 2 || y.size() != y_hat.size()) return std::nullopt;
  if (!y.allFinite() || !y_hat.allFinite()) return std::nullopt;
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (sst == 0.0) return std::nullopt;
  const double sse = (y - y_hat).squaredNorm();
  return 1.0 - sse / sst;
}

}  // namespace symreg

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "symreg/canonical.hpp"
#include "symreg/dataset.hpp"
#include "symreg/parser.hpp"
#include "symreg/rng.hpp"
#include "symreg/tokens.hpp"

namespace symreg {

struct Sampling {
  char kind = 'U';  // U: uniform draws, E: evenly spaced inclusive grid
  double low = 0.0;
  double high = 1.0;
  int count = 20;
};

using Interval = std::pair<double, double>;

struct BenchmarkSpec {
  std::string name;
  std::vector<std::string> suites;
  std::string infix;
  Sampling sampling;
  std::vector<std::string> library_extensions;  // "x2", "pow", "const", ...
  std::vector<std::string> library_removals;
  bool unsupported = false;
  std::string note;

  void validate() const;
  Expression target() const;
  /// Columns of the sampled data: the larger of the target's and the library's.
  int n_variables() const;
  /// Base library [add sub mul div sin cos log exp sqrt x1] adjusted by the
  /// extensions and removals.
  Vocabulary vocabulary() const;
  std::vector<Interval> box() const;
};

class Registry {
 public:
  static Registry from_json(std::string_view text);
  static Registry load(const std::string& path);
  /// The registry compiled into the library from data/benchmarks.json.
  static const Registry& builtin();

  const std::vector<BenchmarkSpec>& all() const { return specs_; }
  /// Throws UsageError naming the unknown benchmark.
  const BenchmarkSpec& get(std::string_view name) const;
  /// Supported members of `suite`, in registry order. Throws UsageError
  /// listing the available suites when the name is unknown.
  std::vector<const BenchmarkSpec*> suite(std::string_view name) const;
  std::vector<std::string> suite_names() const;

 private:
  std::vector<BenchmarkSpec> specs_;
};

/// U: independent uniform rows, a row that violates the target's domain is
/// redrawn. E: every column is the inclusive linspace; a violation throws
/// DataError.
Dataset sample_dataset(const BenchmarkSpec& spec, std::uint64_t seed);

/// y + u, u ~ U[-level*scale, level*scale], scale = max(y) - min(y).
Eigen::VectorXd add_noise(const Eigen::VectorXd& y, double level, Rng& rng);

struct EquivalenceResult {
  bool equivalent = false;
  bool canonical_match = false;
  int valid_points = 0;
  bool inconclusive = false;  // fewer than the required valid probe points
};

constexpr int kProbePoints = 64;
constexpr int kMinValidProbePoints = 32;

/// Canonical match first, then a numeric probe of kProbePoints points drawn
/// in `box` (one interval per variable).
EquivalenceResult check_equivalence(const Expression& a, const Expression& b,
                                    const std::vector<Interval>& box, Rng& rng);
bool symbolically_equivalent(const Expression& a, const Expression& b,
                             const std::vector<Interval>& box, Rng& rng);

/// Throws UsageError on an empty list.
double recovery_rate(const std::vector<bool>& results);

/// 1 - SSE/SST; nullopt when fewer than 2 points, y is constant, or a value
/// is non-finite.
std::optional<double> r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

}  // namespace symreg

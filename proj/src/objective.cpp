#include "symreg/objective.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "symreg/bfgs.hpp"
#include "symreg/errors.hpp"
#include "symreg/rng.hpp"

namespace symreg {

namespace {

double population_sigma(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().mean());
}

}  // namespace

void ConstOptOptions::validate() const {
  if (restarts < 1) throw UsageError("objective.restarts must be >= 1");
  if (!(init_low < init_high)) throw UsageError("objective.init_range needs low < high");
  if (max_iterations < 1) throw UsageError("objective.max_iterations must be >= 1");
  if (!(gradient_step > 0.0) || !(convergence_tol > 0.0)) {
    throw UsageError("objective.gradient_step and convergence_tol must be positive");
  }
}

std::optional<double> nrmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw UsageError("nrmse: length mismatch");
  if (y.size() < 2) return std::nullopt;
  if (!y.allFinite() || !y_hat.allFinite()) return std::nullopt;
  const double sigma = population_sigma(y);
  if (!(sigma > 0.0)) return std::nullopt;
  const double rmse = std::sqrt((y - y_hat).squaredNorm() / static_cast<double>(y.size()));
  const double out = rmse / sigma;
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

double omission_penalty(const ExprTree& tree, const Eigen::MatrixXd& X, double lambda) {
  if (lambda == 0.0) return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (contains_variable(tree, static_cast<int>(j))) continue;
    const Eigen::VectorXd col = X.col(j);
    const double sigma = population_sigma(col);
    if (!(sigma > 0.0)) continue;
    total += std::sqrt(col.squaredNorm() / static_cast<double>(col.size())) / sigma;
  }
  return lambda * total;
}

std::optional<double> s_nrmse(const ExprTree& tree, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat,
                              double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("s_nrmse: lambda must be in [0, 1]");
  auto base = nrmse(y, y_hat);
  if (!base) return std::nullopt;
  return *base + omission_penalty(tree, X, lambda);
}

double reward(std::optional<double> s) {
  if (!s || !(*s >= 0.0)) return 0.0;
  return 1.0 / (1.0 + *s);
}

FitMetrics score(const ExprTree& tree, const Dataset& data, std::span<const double> constants,
                 double lambda) {
  auto y_hat = evaluate(tree, data.X, constants);
  if (!y_hat) return FitMetrics::invalid();
  auto base = nrmse(data.y, *y_hat);
  if (!base) return FitMetrics::invalid();
  FitMetrics m;
  m.nrmse = *base;
  m.s_nrmse = *base + omission_penalty(tree, data.X, lambda);
  m.reward = reward(m.s_nrmse);
  m.valid = true;
  return m;
}

ConstantFit optimize_constants(const ExprTree& tree, const Dataset& data, double lambda,
                               const ConstOptOptions& opts, std::uint64_t seed) {
  const int k = tree.constant_count();
  if (k == 0) return ConstantFit{{}, score(tree, data, {}, lambda)};

  // The omission penalty does not depend on the constants, so only the NRMSE
  // part is minimised; the penalty is added back when scoring.
  const ScalarObjective objective = [&](const Eigen::VectorXd& c) {
    auto y_hat = evaluate(tree, data.X, std::span<const double>(c.data(), c.size()));
    if (!y_hat) return std::numeric_limits<double>::infinity();
    auto e = nrmse(data.y, *y_hat);
    return e ? *e : std::numeric_limits<double>::infinity();
  };
  BfgsOptions bopts;
  bopts.max_iterations = opts.max_iterations;
  bopts.gradient_step = opts.gradient_step;
  bopts.convergence_tol = opts.convergence_tol;

  Rng rng(seed);
  ConstantFit best{std::vector<double>(static_cast<std::size_t>(k), 1.0), FitMetrics::invalid()};
  double best_value = std::numeric_limits<double>::infinity();
  for (int start = 0; start <= opts.restarts; ++start) {
    Eigen::VectorXd x0(k);
    for (int i = 0; i < k; ++i) {
      x0[i] = start == 0 ? 1.0 : rng.uniform(opts.init_low, opts.init_high);
    }
    BfgsResult r = minimize_bfgs(objective, x0, bopts);
    if (r.value < best_value) {
      best_value = r.value;
      best.constants.assign(r.x.data(), r.x.data() + r.x.size());
    }
    if (best_value == 0.0) break;
  }
  if (std::isfinite(best_value)) best.metrics = score(tree, data, best.constants, lambda);
  return best;
}

}  // namespace symreg

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "symreg/dataset.hpp"
#include "symreg/expr_tree.hpp"

namespace symreg {

struct FitMetrics {
  double nrmse = 0.0;
  double s_nrmse = 0.0;
  double reward = 0.0;
  bool valid = false;

  static FitMetrics invalid() { return FitMetrics{}; }
};

struct ConstOptOptions {
  int max_iterations = 200;
  int restarts = 4;
  double init_low = -2.0;
  double init_high = 2.0;
  double gradient_step = 1e-6;
  double convergence_tol = 1e-10;

  void validate() const;
};

/// Population-sigma normalised RMSE. nullopt for non-finite input, a
/// constant target (sigma_y == 0) or fewer than two points.
std::optional<double> nrmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

/// Penalty part of S_NRMSE: lambda * sum over variables absent from `tree`
/// of RMS(x_j) / sigma(x_j). Columns with sigma == 0 contribute nothing.
double omission_penalty(const ExprTree& tree, const Eigen::MatrixXd& X, double lambda);

std::optional<double> s_nrmse(const ExprTree& tree, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat,
                              double lambda);

/// 1 / (1 + s); an invalid fit scores 0.
double reward(std::optional<double> s);

FitMetrics score(const ExprTree& tree, const Dataset& data, std::span<const double> constants,
                 double lambda);

struct ConstantFit {
  std::vector<double> constants;
  FitMetrics metrics;
};

/// Fits the tree's constant placeholders by minimising S_NRMSE with BFGS from
/// an all-ones start plus `restarts` uniform draws seeded by `seed`.
ConstantFit optimize_constants(const ExprTree& tree, const Dataset& data, double lambda,
                               const ConstOptOptions& opts, std::uint64_t seed);

}  // namespace symreg

#pragma once

#include <functional>

#include <Eigen/Core>

namespace symreg {

struct BfgsOptions {
  int max_iterations = 200;
  double gradient_step = 1e-6;  // central-difference step (relative to |x|+1)
  double convergence_tol = 1e-10;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Objective that may return +inf / NaN for points outside its domain.
using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

Eigen::VectorXd central_gradient(const ScalarObjective& f, const Eigen::VectorXd& x, double step);

/// BFGS with central-difference gradients and a backtracking Armijo line
/// search. Returns the best finite point seen; value is +inf if the start
/// point itself is not finite.
BfgsResult minimize_bfgs(const ScalarObjective& f, Eigen::VectorXd x0, const BfgsOptions& opts);

}  // namespace symreg

#include "symreg/bfgs.hpp"

#include <cmath>
#include <limits>

namespace symreg {

namespace {

double finite_or_inf(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::VectorXd central_gradient(const ScalarObjective& f, const Eigen::VectorXd& x,
                                 double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * (1.0 + std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

BfgsResult minimize_bfgs(const ScalarObjective& f, Eigen::VectorXd x0, const BfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  BfgsResult result;
  result.x = x0;
  result.value = finite_or_inf(f(x0));
  if (!std::isfinite(result.value) || n == 0) {
    result.converged = n == 0 && std::isfinite(result.value);
    return result;
  }

  Eigen::VectorXd x = std::move(x0);
  double fx = result.value;
  Eigen::VectorXd g = central_gradient(f, x, opts.gradient_step);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);  // inverse Hessian estimate

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (!g.allFinite()) break;
    if (g.norm() <= opts.convergence_tol) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      // Lost descent: restart from steepest descent.
      H.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * dir;
      f_new = finite_or_inf(f(x_new));
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (H.isIdentity()) break;
      H.setIdentity();
      continue;
    }

    const Eigen::VectorXd g_new = central_gradient(f, x_new, opts.gradient_step);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double improvement = fx - f_new;
    x = x_new;
    fx = f_new;
    g = g_new;

    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) +
          rho * s * s.transpose();
    }
    if (improvement <= opts.convergence_tol * (1.0 + std::abs(fx)) &&
        s.norm() <= opts.convergence_tol * (1.0 + x.norm())) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.value = fx;
  return result;
}

}  // namespace symreg

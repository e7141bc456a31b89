#pragma once

#include <string>

#include <Eigen/Core>

namespace symreg {

/// Realised regression data: X is N x m (column j is variable x_{j+1}).
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::string provenance;

  int rows() const { return static_cast<int>(X.rows()); }
  int n_variables() const { return static_cast<int>(X.cols()); }
};

}  // namespace symreg

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "symreg/tokens.hpp"
#include "symreg/traversal.hpp"

namespace symreg {

struct ExprNode {
  Token token;
  std::array<int, 2> children{-1, -1};
  int const_slot = -1;  // preorder index among constant placeholders
};

/// Expression tree stored in preorder: node 0 is the root and the node list
/// read front to back is the source traversal.
class ExprTree {
 public:
  /// Throws StructuralError unless `tokens` is exactly one complete tree.
  static ExprTree build(std::span<const Token> tokens);
  static ExprTree build(const Traversal& traversal);

  const std::vector<ExprNode>& nodes() const { return nodes_; }
  const ExprNode& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int constant_count() const { return constant_count_; }
  /// Largest variable column used, or -1.
  int max_variable() const;

  std::vector<Token> preorder() const;

 private:
  std::vector<ExprNode> nodes_;
  int constant_count_ = 0;
};

inline ExprTree build_tree(const Traversal& traversal) { return ExprTree::build(traversal); }

/// Row-wise evaluation over X (N x m). Returns nullopt when any intermediate
/// value is non-finite (domain violation, division by zero, overflow).
std::optional<Eigen::VectorXd> evaluate(const ExprTree& tree, const Eigen::MatrixXd& X,
                                        std::span<const double> constants);

bool contains_variable(const ExprTree& tree, int column);

/// Fully parenthesised infix with shortest round-trip constants.
std::string to_infix(const ExprTree& tree, std::span<const double> constants);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace symreg

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "symreg/expr_tree.hpp"

namespace symreg {

/// A complete tree with its constant placeholders bound, in preorder slot order.
struct Expression {
  ExprTree tree;
  std::vector<double> constants;

  std::string infix() const { return to_infix(tree, constants); }
};

/// Infix grammar used by the benchmark registry:
///   + - * / ^ (right-assoc), unary minus, parentheses, numbers (incl. 1e-3),
///   pi, x or x1..xN, and sin cos exp log ln sqrt.
/// Numeric literals become bound constants. Throws StructuralError with the
/// offending position on malformed input.
Expression parse_infix(std::string_view text);

/// Expression from a preorder token list and its constants.
Expression make_expression(std::span<const Token> tokens, std::vector<double> constants);

}  // namespace symreg

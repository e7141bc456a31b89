#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "symreg/expr_tree.hpp"

namespace symreg {

enum class CanonOp : std::uint8_t { Const, Var, Add, Mul, Pow, Sin, Cos, Exp, Sqrt, Log };

/// Normal form: n-ary Add/Mul with sorted operands, no Sub/Div, folded
/// constants. Deliberately not a CAS: no distribution, no merging of like
/// terms or exponents.
struct CanonNode {
  CanonOp op = CanonOp::Const;
  double value = 0.0;  // Const
  int var = 0;         // Var (zero-based column)
  std::vector<CanonNode> args;
};

CanonNode canonicalize(const ExprTree& tree, std::span<const double> constants);
CanonNode canonicalize(const CanonNode& node);

/// Total order on canonical forms (constants compared exactly).
int compare(const CanonNode& a, const CanonNode& b);

/// Structural equality with constants matched within `rel_tol` relative.
bool canonical_equal(const CanonNode& a, const CanonNode& b, double rel_tol = 1e-6);

std::string to_string(const CanonNode& node);

}  // namespace symreg

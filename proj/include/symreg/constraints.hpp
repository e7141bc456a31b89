#pragma once

#include <span>
#include <utility>
#include <vector>

#include "symreg/tokens.hpp"
#include "symreg/traversal.hpp"

namespace symreg {

using Mask = std::vector<bool>;

struct ConstraintConfig {
  int max_length = 30;
  // exp(log(.)) and log(exp(.)) style chains
  bool forbid_inverse_chain = true;
  // sin/cos anywhere below another sin/cos (or only directly below it when
  // trig_any_ancestor is false)
  bool forbid_nested_trig = true;
  bool trig_any_ancestor = true;
  // sin/cos as the direct argument of log or sqrt
  bool forbid_negative_into_log_sqrt = true;
  // Unordered pairs of unary symbols that may not be directly nested.
  std::vector<std::pair<Symbol, Symbol>> inverse_pairs{{Symbol::Exp, Symbol::Log}};

  /// Everything off except length feasibility.
  static ConstraintConfig feasibility_only(int max_length = 30);
  void validate() const;
};

/// Tokens that may legally follow `traversal`. Never all-false for an
/// incomplete traversal shorter than max_length.
Mask legal_mask(const Traversal& traversal, const Vocabulary& vocab, const ConstraintConfig& cfg);

/// Zeroes masked-out entries and renormalises; falls back to uniform over
/// the legal entries when they carry no mass.
std::vector<double> apply_mask(std::span<const double> probs, const Mask& mask);

}  // namespace symreg

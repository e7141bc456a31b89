#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "symreg/tokens.hpp"

namespace symreg {

/// A partial preorder token sequence plus its completeness counter
/// (1 + sum of (arity - 1)). counter == 0 iff the sequence is one complete tree.
class Traversal {
 public:
  explicit Traversal(int max_length = 30);

  static Traversal from_tokens(std::span<const Token> tokens, int max_length);

  /// Throws UsageError when complete or already at max_length.
  void push(const Token& token);
  Traversal pushed(const Token& token) const;

  bool is_complete() const { return counter_ == 0 && !tokens_.empty(); }
  int counter() const { return counter_; }
  int size() const { return static_cast<int>(tokens_.size()); }
  bool empty() const { return tokens_.empty(); }
  int max_length() const { return max_length_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const Token& back() const { return tokens_.back(); }

  friend bool operator==(const Traversal&, const Traversal&) = default;

 private:
  std::vector<Token> tokens_;
  int counter_ = 1;
  int max_length_ = 30;
};

/// Positions of the parent and left sibling of the next slot to be filled,
/// -1 for "empty". Works on bare arities so the network can use it on ids.
std::pair<int, int> parent_sibling_positions(std::span<const int> arities);

/// Parent and left sibling of the next token. Throws UsageError on a
/// complete traversal.
std::pair<std::optional<Token>, std::optional<Token>> parent_sibling(
    const Traversal& traversal);

/// The still-open operator nodes that enclose the next slot, outermost first.
std::vector<Token> pending_ancestors(std::span<const Token> tokens);

}  // namespace symreg

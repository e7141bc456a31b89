#include "symreg/traversal.hpp"

#include <string>

#include "symreg/errors.hpp"

namespace symreg {

Traversal::Traversal(int max_length) : max_length_(max_length) {
  if (max_length < 1) throw UsageError("max_length must be positive");
}

Traversal Traversal::from_tokens(std::span<const Token> tokens, int max_length) {
  Traversal t(max_length);
  for (const auto& token : tokens) t.push(token);
  return t;
}

void Traversal::push(const Token& token) {
  if (is_complete()) throw UsageError("push onto a complete traversal");
  if (size() >= max_length_) {
    throw UsageError("push past max_length " + std::to_string(max_length_));
  }
  tokens_.push_back(token);
  counter_ += arity(token) - 1;
}

Traversal Traversal::pushed(const Token& token) const {
  Traversal copy = *this;
  copy.push(token);
  return copy;
}

std::pair<int, int> parent_sibling_positions(std::span<const int> arities) {
  const int n = static_cast<int>(arities.size());
  if (n == 0) return {-1, -1};
  if (arities[static_cast<std::size_t>(n - 1)] > 0) return {n - 1, -1};
  int counter = 0;
  for (int i = n - 1; i >= 0; --i) {
    counter += arities[static_cast<std::size_t>(i)] - 1;
    if (counter == 0) return {i, i + 1};
  }
  // Only reachable for a complete sequence; callers reject that case.
  return {-1, -1};
}

std::pair<std::optional<Token>, std::optional<Token>> parent_sibling(
    const Traversal& traversal) {
  if (traversal.is_complete()) throw UsageError("parent_sibling of a complete traversal");
  std::vector<int> arities;
  arities.reserve(traversal.tokens().size());
  for (const auto& t : traversal.tokens()) arities.push_back(arity(t));
  auto [p, s] = parent_sibling_positions(arities);
  std::pair<std::optional<Token>, std::optional<Token>> out;
  if (p >= 0) out.first = traversal.tokens()[static_cast<std::size_t>(p)];
  if (s >= 0) out.second = traversal.tokens()[static_cast<std::size_t>(s)];
  return out;
}

std::vector<Token> pending_ancestors(std::span<const Token> tokens) {
  struct Open {
    Token token;
    int remaining;
  };
  std::vector<Open> stack;
  for (const auto& t : tokens) {
    // Each token fills one slot of the innermost open node; that node stays
    // on the stack until the subtree in its last slot closes.
    if (!stack.empty()) --stack.back().remaining;
    if (arity(t) > 0) {
      stack.push_back({t, arity(t)});
    } else {
      while (!stack.empty() && stack.back().remaining == 0) stack.pop_back();
    }
  }
  std::vector<Token> out;
  out.reserve(stack.size());
  for (const auto& o : stack) out.push_back(o.token);
  return out;
}

}  // namespace symreg

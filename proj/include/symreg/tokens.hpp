#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symreg {

enum class TokenKind : std::uint8_t { Binary, Unary, Variable, Constant };

enum class Symbol : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Log,
  Var,
  Const,
};

/// One grammar symbol. Variables carry a zero-based column index; the
/// printed name is 1-based (`x1` is column 0).
struct Token {
  Symbol symbol = Symbol::Const;
  std::uint16_t var = 0;

  static constexpr Token variable(int index) {
    return Token{Symbol::Var, static_cast<std::uint16_t>(index)};
  }
  static constexpr Token constant() { return Token{Symbol::Const, 0}; }

  TokenKind kind() const;
  std::string name() const;

  friend bool operator==(const Token&, const Token&) = default;
};

int arity(TokenKind kind);
inline int arity(const Token& token) { return arity(token.kind()); }

bool is_trig(const Token& token);

/// Parses an operator name ("add", "sin", ...) or a variable ("x3") or "c".
std::optional<Token> token_from_name(std::string_view name);

/// The operators of the full symbol library, in vocabulary order.
std::span<const Symbol> all_operators();

/// Ordered token set used by the search and the network. Token ids are
/// positions in this list.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<Token> tokens);

  /// Operators in `operators` order, then x1..xn, then `c` if requested.
  static Vocabulary make(std::span<const Symbol> operators, int n_variables,
                         bool with_constant);

  int size() const { return static_cast<int>(tokens_.size()); }
  const Token& operator[](int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<Token>& tokens() const { return tokens_; }
  int n_variables() const { return n_variables_; }
  bool has_constant() const { return constant_id_.has_value(); }

  std::optional<int> id_of(const Token& token) const;
  /// Reserved id for an empty parent/sibling slot; never a real token.
  int padding_id() const { return size(); }

  std::vector<int> arities() const;
  std::vector<int> encode(std::span<const Token> tokens) const;
  std::vector<Token> decode(std::span<const int> ids) const;
  std::vector<std::string> names() const;

 private:
  std::vector<Token> tokens_;
  int n_variables_ = 0;
  std::optional<int> constant_id_;
};

}  // namespace symreg

#include "symreg/tokens.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

constexpr std::array kOperators = {Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div,
                                   Symbol::Pow, Symbol::Sin, Symbol::Cos, Symbol::Exp,
                                   Symbol::Sqrt, Symbol::Log};

constexpr std::string_view operator_name(Symbol s) {
  switch (s) {
    case Symbol::Add: return "add";
    case Symbol::Sub: return "sub";
    case Symbol::Mul: return "mul";
    case Symbol::Div: return "div";
    case Symbol::Pow: return "pow";
    case Symbol::Sin: return "sin";
    case Symbol::Cos: return "cos";
    case Symbol::Exp: return "exp";
    case Symbol::Sqrt: return "sqrt";
    case Symbol::Log: return "log";
    case Symbol::Var: return "x";
    case Symbol::Const: return "c";
  }
  return "?";
}

}  // namespace

TokenKind Token::kind() const {
  switch (symbol) {
    case Symbol::Add:
    case Symbol::Sub:
    case Symbol::Mul:
    case Symbol::Div:
    case Symbol::Pow:
      return TokenKind::Binary;
    case Symbol::Sin:
    case Symbol::Cos:
    case Symbol::Exp:
    case Symbol::Sqrt:
    case Symbol::Log:
      return TokenKind::Unary;
    case Symbol::Var:
      return TokenKind::Variable;
    case Symbol::Const:
      return TokenKind::Constant;
  }
  return TokenKind::Constant;
}

std::string Token::name() const {
  if (symbol == Symbol::Var) return "x" + std::to_string(var + 1);
  return std::string(operator_name(symbol));
}

int arity(TokenKind kind) {
  switch (kind) {
    case TokenKind::Binary: return 2;
    case TokenKind::Unary: return 1;
    case TokenKind::Variable:
    case TokenKind::Constant: return 0;
  }
  return 0;
}

bool is_trig(const Token& token) {
  return token.symbol == Symbol::Sin || token.symbol == Symbol::Cos;
}

std::optional<Token> token_from_name(std::string_view name) {
  if (name == "c" || name == "const") return Token::constant();
  if (name == "ln") return Token{Symbol::Log, 0};
  for (Symbol s : kOperators) {
    if (operator_name(s) == name) return Token{s, 0};
  }
  if (name.size() >= 2 && name.front() == 'x') {
    int index = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
    if (ec == std::errc() && ptr == name.data() + name.size() && index >= 1 && index <= 1000) {
      return Token::variable(index - 1);
    }
  }
  return std::nullopt;
}

std::span<const Symbol> all_operators() { return kOperators; }

Vocabulary::Vocabulary(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (tokens_[i] == tokens_[j]) {
        throw UsageError("duplicate token in vocabulary: " + tokens_[i].name());
      }
    }
    if (tokens_[i].symbol == Symbol::Var) ++n_variables_;
    if (tokens_[i].symbol == Symbol::Const) constant_id_ = static_cast<int>(i);
  }
}

Vocabulary Vocabulary::make(std::span<const Symbol> operators, int n_variables,
                            bool with_constant) {
  std::vector<Token> tokens;
  for (Symbol s : operators) {
    if (s == Symbol::Var || s == Symbol::Const) {
      throw UsageError("operator list may not contain variables or constants");
    }
    tokens.push_back(Token{s, 0});
  }
  for (int j = 0; j < n_variables; ++j) tokens.push_back(Token::variable(j));
  if (with_constant) tokens.push_back(Token::constant());
  return Vocabulary(std::move(tokens));
}

std::optional<int> Vocabulary::id_of(const Token& token) const {
  auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) return std::nullopt;
  return static_cast<int>(it - tokens_.begin());
}

std::vector<int> Vocabulary::arities() const {
  std::vector<int> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(arity(t));
  return out;
}

std::vector<int> Vocabulary::encode(std::span<const Token> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto id = id_of(t);
    if (!id) throw UsageError("token not in vocabulary: " + t.name());
    ids.push_back(*id);
  }
  return ids;
}

std::vector<Token> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<Token> tokens;
  tokens.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= size()) throw UsageError("token id out of range: " + std::to_string(id));
    tokens.push_back(tokens_[static_cast<std::size_t>(id)]);
  }
  return tokens;
}

std::vector<std::string> Vocabulary::names() const {
  std::vector<std::string> out;
  for (const auto& t : tokens_) out.push_back(t.name());
  return out;
}

}  // namespace symreg

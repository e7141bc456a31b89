#include "symreg/parser.hpp"

#include <cctype>
#include <charconv>
#include <memory>
#include <numbers>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

// Intermediate tree; flattened to preorder tokens once parsing succeeds.
struct PNode {
  Token token;
  double value = 0.0;
  std::unique_ptr<PNode> a, b;
};

using PPtr = std::unique_ptr<PNode>;

PPtr leaf_const(double v) {
  auto n = std::make_unique<PNode>();
  n->token = Token::constant();
  n->value = v;
  return n;
}

PPtr node(Symbol s, PPtr a, PPtr b = nullptr) {
  auto n = std::make_unique<PNode>();
  n->token = Token{s, 0};
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  PPtr parse() {
    PPtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw StructuralError("parse error at position " + std::to_string(pos_) + " in \"" +
                          std::string(s_) + "\": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  PPtr expr() {
    PPtr lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = node(Symbol::Add, std::move(lhs), term());
      } else if (eat('-')) {
        lhs = node(Symbol::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  PPtr term() {
    PPtr lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = node(Symbol::Mul, std::move(lhs), unary());
      } else if (eat('/')) {
        lhs = node(Symbol::Div, std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  // -a^b is -(a^b); a^-b is allowed.
  PPtr unary() {
    if (eat('-')) {
      PPtr operand = unary();
      if (operand->token.symbol == Symbol::Const) {
        operand->value = -operand->value;
        return operand;
      }
      return node(Symbol::Mul, leaf_const(-1.0), std::move(operand));
    }
    if (eat('+')) return unary();
    return power();
  }

  PPtr power() {
    PPtr base = primary();
    if (eat('^')) return node(Symbol::Pow, std::move(base), unary());
    return base;
  }

  PPtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      PPtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  PPtr number() {
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("bad number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return leaf_const(v);
  }

  PPtr word() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string w(s_.substr(start, pos_ - start));
    if (w == "pi") return leaf_const(std::numbers::pi);
    if (w == "x") {
      auto n = std::make_unique<PNode>();
      n->token = Token::variable(0);
      return n;
    }
    if (w.size() > 1 && w[0] == 'x') {
      int idx = 0;
      auto [p, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), idx);
      if (ec != std::errc() || p != w.data() + w.size() || idx < 1) fail("bad variable " + w);
      auto n = std::make_unique<PNode>();
      n->token = Token::variable(idx - 1);
      return n;
    }
    Symbol s;
    if (w == "sin") {
      s = Symbol::Sin;
    } else if (w == "cos") {
      s = Symbol::Cos;
    } else if (w == "exp") {
      s = Symbol::Exp;
    } else if (w == "log" || w == "ln") {
      s = Symbol::Log;
    } else if (w == "sqrt") {
      s = Symbol::Sqrt;
    } else {
      pos_ = start;
      fail("unknown name '" + w + "'");
    }
    if (!eat('(')) fail("expected '(' after " + w);
    PPtr arg = expr();
    if (!eat(')')) fail("expected ')'");
    return node(s, std::move(arg));
  }
};

void flatten(const PNode& n, std::vector<Token>& tokens, std::vector<double>& constants) {
  tokens.push_back(n.token);
  if (n.token.symbol == Symbol::Const) constants.push_back(n.value);
  if (n.a) flatten(*n.a, tokens, constants);
  if (n.b) flatten(*n.b, tokens, constants);
}

}  // namespace

Expression make_expression(std::span<const Token> tokens, std::vector<double> constants) {
  Expression e;
  e.tree = ExprTree::build(tokens);
  if (static_cast<int>(constants.size()) != e.tree.constant_count()) {
    throw StructuralError("make_expression: constant count does not match the tree");
  }
  e.constants = std::move(constants);
  return e;
}

Expression parse_infix(std::string_view text) {
  PPtr root = Parser(text).parse();
  std::vector<Token> tokens;
  std::vector<double> constants;
  flatten(*root, tokens, constants);
  return make_expression(tokens, std::move(constants));
}

}  // namespace symreg

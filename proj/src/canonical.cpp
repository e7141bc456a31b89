#include "symreg/canonical.hpp"

#include <algorithm>
#include <cmath>

namespace symreg {

namespace {

bool is_const(const CanonNode& n) { return n.op == CanonOp::Const; }

CanonNode make_const(double v) {
  CanonNode n;
  n.op = CanonOp::Const;
  n.value = v == 0.0 ? 0.0 : v;  // no -0
  return n;
}

CanonNode make_op(CanonOp op, std::vector<CanonNode> args) {
  CanonNode n;
  n.op = op;
  n.args = std::move(args);
  return n;
}

double apply_unary(CanonOp op, double v) {
  switch (op) {
    case CanonOp::Sin: return std::sin(v);
    case CanonOp::Cos: return std::cos(v);
    case CanonOp::Exp: return std::exp(v);
    case CanonOp::Sqrt: return std::sqrt(v);
    case CanonOp::Log: return std::log(v);
    default: return v;
  }
}

CanonNode normalize_nary(CanonOp op, std::vector<CanonNode> args) {
  const bool add = op == CanonOp::Add;
  const double identity = add ? 0.0 : 1.0;
  double folded = identity;
  std::vector<CanonNode> rest;
  for (auto& a : args) {
    if (a.op == op) {
      for (auto& inner : a.args) {
        if (is_const(inner)) {
          folded = add ? folded + inner.value : folded * inner.value;
        } else {
          rest.push_back(std::move(inner));
        }
      }
    } else if (is_const(a)) {
      folded = add ? folded + a.value : folded * a.value;
    } else {
      rest.push_back(std::move(a));
    }
  }
  if (!add && folded == 0.0) return make_const(0.0);
  if (folded != identity || rest.empty()) rest.push_back(make_const(folded));
  if (rest.size() == 1) return std::move(rest.front());
  std::sort(rest.begin(), rest.end(),
            [](const CanonNode& a, const CanonNode& b) { return compare(a, b) < 0; });
  return make_op(op, std::move(rest));
}

CanonNode normalize_pow(CanonNode base, CanonNode exponent) {
  if (is_const(base) && is_const(exponent)) {
    const double v = std::pow(base.value, exponent.value);
    if (std::isfinite(v)) return make_const(v);
  }
  if (is_const(exponent) && exponent.value == 1.0) return base;
  std::vector<CanonNode> args;
  args.push_back(std::move(base));
  args.push_back(std::move(exponent));
  return make_op(CanonOp::Pow, std::move(args));
}

CanonNode normalize_unary(CanonOp op, CanonNode arg) {
  if (is_const(arg)) {
    const double v = apply_unary(op, arg.value);
    if (std::isfinite(v)) return make_const(v);
  }
  std::vector<CanonNode> args;
  args.push_back(std::move(arg));
  return make_op(op, std::move(args));
}

CanonNode from_tree(const ExprTree& tree, std::span<const double> constants, int index) {
  const ExprNode& n = tree.node(index);
  auto child = [&](int k) { return from_tree(tree, constants, n.children[static_cast<std::size_t>(k)]); };
  switch (n.token.symbol) {
    case Symbol::Const:
      return make_const(constants[static_cast<std::size_t>(n.const_slot)]);
    case Symbol::Var: {
      CanonNode v;
      v.op = CanonOp::Var;
      v.var = n.token.var;
      return v;
    }
    case Symbol::Add: {
      std::vector<CanonNode> args;
      args.push_back(child(0));
      args.push_back(child(1));
      return normalize_nary(CanonOp::Add, std::move(args));
    }
    case Symbol::Sub: {
      std::vector<CanonNode> neg;
      neg.push_back(make_const(-1.0));
      neg.push_back(child(1));
      std::vector<CanonNode> args;
      args.push_back(child(0));
      args.push_back(normalize_nary(CanonOp::Mul, std::move(neg)));
      return normalize_nary(CanonOp::Add, std::move(args));
    }
    case Symbol::Mul: {
      std::vector<CanonNode> args;
      args.push_back(child(0));
      args.push_back(child(1));
      return normalize_nary(CanonOp::Mul, std::move(args));
    }
    case Symbol::Div: {
      std::vector<CanonNode> args;
      args.push_back(child(0));
      args.push_back(normalize_pow(child(1), make_const(-1.0)));
      return normalize_nary(CanonOp::Mul, std::move(args));
    }
    case Symbol::Pow:
      return normalize_pow(child(0), child(1));
    case Symbol::Sin: return normalize_unary(CanonOp::Sin, child(0));
    case Symbol::Cos: return normalize_unary(CanonOp::Cos, child(0));
    case Symbol::Exp: return normalize_unary(CanonOp::Exp, child(0));
    case Symbol::Sqrt: return normalize_unary(CanonOp::Sqrt, child(0));
    case Symbol::Log: return normalize_unary(CanonOp::Log, child(0));
  }
  return make_const(0.0);
}

}  // namespace

CanonNode canonicalize(const ExprTree& tree, std::span<const double> constants) {
  return from_tree(tree, constants, 0);
}

CanonNode canonicalize(const CanonNode& node) {
  switch (node.op) {
    case CanonOp::Const:
    case CanonOp::Var:
      return node;
    case CanonOp::Add:
    case CanonOp::Mul: {
      std::vector<CanonNode> args;
      for (const auto& a : node.args) args.push_back(canonicalize(a));
      return normalize_nary(node.op, std::move(args));
    }
    case CanonOp::Pow:
      return normalize_pow(canonicalize(node.args[0]), canonicalize(node.args[1]));
    default:
      return normalize_unary(node.op, canonicalize(node.args[0]));
  }
}

int compare(const CanonNode& a, const CanonNode& b) {
  if (a.op != b.op) return a.op < b.op ? -1 : 1;
  if (a.op == CanonOp::Const) {
    if (a.value == b.value) return 0;
    return a.value < b.value ? -1 : 1;
  }
  if (a.op == CanonOp::Var) return a.var == b.var ? 0 : (a.var < b.var ? -1 : 1);
  const std::size_t n = std::min(a.args.size(), b.args.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a.args[i], b.args[i]); c != 0) return c;
  }
  if (a.args.size() == b.args.size()) return 0;
  return a.args.size() < b.args.size() ? -1 : 1;
}

bool canonical_equal(const CanonNode& a, const CanonNode& b, double rel_tol) {
  if (a.op != b.op) return false;
  if (a.op == CanonOp::Const) {
    return std::abs(a.value - b.value) <= rel_tol * std::max(std::abs(a.value), std::abs(b.value));
  }
  if (a.op == CanonOp::Var) return a.var == b.var;
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!canonical_equal(a.args[i], b.args[i], rel_tol)) return false;
  }
  return true;
}

std::string to_string(const CanonNode& node) {
  switch (node.op) {
    case CanonOp::Const: return format_number(node.value);
    case CanonOp::Var: return "x" + std::to_string(node.var + 1);
    case CanonOp::Add:
    case CanonOp::Mul: {
      std::string s = node.op == CanonOp::Add ? "add(" : "mul(";
      for (std::size_t i = 0; i < node.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(node.args[i]);
      }
      return s + ")";
    }
    case CanonOp::Pow: return "pow(" + to_string(node.args[0]) + ", " + to_string(node.args[1]) + ")";
    case CanonOp::Sin: return "sin(" + to_string(node.args[0]) + ")";
    case CanonOp::Cos: return "cos(" + to_string(node.args[0]) + ")";
    case CanonOp::Exp: return "exp(" + to_string(node.args[0]) + ")";
    case CanonOp::Sqrt: return "sqrt(" + to_string(node.args[0]) + ")";
    case CanonOp::Log: return "log(" + to_string(node.args[0]) + ")";
  }
  return {};
}

}  // namespace symreg

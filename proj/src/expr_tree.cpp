#include "symreg/expr_tree.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

int build_subtree(std::span<const Token> tokens, std::size_t& pos, std::vector<ExprNode>& nodes,
                  int& constants) {
  if (pos >= tokens.size()) throw StructuralError("traversal ends before the tree is complete");
  const int index = static_cast<int>(nodes.size());
  ExprNode node;
  node.token = tokens[pos++];
  if (node.token.symbol == Symbol::Const) node.const_slot = constants++;
  nodes.push_back(node);
  const int n = arity(node.token);
  for (int k = 0; k < n; ++k) {
    const int child = build_subtree(tokens, pos, nodes, constants);
    nodes[static_cast<std::size_t>(index)].children[static_cast<std::size_t>(k)] = child;
  }
  return index;
}

bool all_finite(const Eigen::ArrayXd& a) { return a.allFinite(); }

void render(const ExprTree& tree, int index, std::span<const double> constants,
            std::string& out) {
  const ExprNode& n = tree.node(index);
  switch (n.token.kind()) {
    case TokenKind::Variable:
      out += n.token.name();
      return;
    case TokenKind::Constant:
      out += format_number(constants[static_cast<std::size_t>(n.const_slot)]);
      return;
    case TokenKind::Unary:
      out += n.token.name();
      out += '(';
      render(tree, n.children[0], constants, out);
      out += ')';
      return;
    case TokenKind::Binary: {
      const char* op = " + ";
      switch (n.token.symbol) {
        case Symbol::Sub: op = " - "; break;
        case Symbol::Mul: op = " * "; break;
        case Symbol::Div: op = " / "; break;
        case Symbol::Pow: op = " ^ "; break;
        default: break;
      }
      out += '(';
      render(tree, n.children[0], constants, out);
      out += op;
      render(tree, n.children[1], constants, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

ExprTree ExprTree::build(std::span<const Token> tokens) {
  if (tokens.empty()) throw StructuralError("empty traversal");
  ExprTree tree;
  std::size_t pos = 0;
  build_subtree(tokens, pos, tree.nodes_, tree.constant_count_);
  if (pos != tokens.size()) {
    throw StructuralError("traversal has " + std::to_string(tokens.size() - pos) +
                          " tokens after a complete tree");
  }
  return tree;
}

ExprTree ExprTree::build(const Traversal& traversal) {
  if (!traversal.is_complete()) throw StructuralError("traversal is not complete");
  return build(traversal.tokens());
}

int ExprTree::max_variable() const {
  int m = -1;
  for (const auto& n : nodes_) {
    if (n.token.symbol == Symbol::Var) m = std::max(m, static_cast<int>(n.token.var));
  }
  return m;
}

std::vector<Token> ExprTree::preorder() const {
  std::vector<Token> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.token);
  return out;
}

std::optional<Eigen::VectorXd> evaluate(const ExprTree& tree, const Eigen::MatrixXd& X,
                                        std::span<const double> constants) {
  if (static_cast<int>(constants.size()) != tree.constant_count()) {
    throw UsageError("evaluate: expected " + std::to_string(tree.constant_count()) +
                     " constants, got " + std::to_string(constants.size()));
  }
  if (tree.max_variable() >= X.cols()) {
    throw UsageError("evaluate: expression uses x" + std::to_string(tree.max_variable() + 1) +
                     " but data has " + std::to_string(X.cols()) + " columns");
  }
  const Eigen::Index rows = X.rows();
  // Reverse preorder: children are on the stack when their parent is reached,
  // the left child on top.
  std::vector<Eigen::ArrayXd> stack;
  stack.reserve(static_cast<std::size_t>(tree.size()));
  for (int i = tree.size() - 1; i >= 0; --i) {
    const ExprNode& n = tree.node(i);
    switch (n.token.symbol) {
      case Symbol::Var:
        stack.emplace_back(X.col(n.token.var).array());
        continue;
      case Symbol::Const:
        stack.emplace_back(
            Eigen::ArrayXd::Constant(rows, constants[static_cast<std::size_t>(n.const_slot)]));
        break;
      case Symbol::Sin: stack.back() = stack.back().sin(); break;
      case Symbol::Cos: stack.back() = stack.back().cos(); break;
      case Symbol::Exp: stack.back() = stack.back().exp(); break;
      case Symbol::Sqrt: stack.back() = stack.back().sqrt(); break;
      case Symbol::Log: stack.back() = stack.back().log(); break;
      case Symbol::Add:
      case Symbol::Sub:
      case Symbol::Mul:
      case Symbol::Div:
      case Symbol::Pow: {
        Eigen::ArrayXd left = std::move(stack.back());
        stack.pop_back();
        Eigen::ArrayXd& right = stack.back();
        switch (n.token.symbol) {
          case Symbol::Add: right = left + right; break;
          case Symbol::Sub: right = left - right; break;
          case Symbol::Mul: right = left * right; break;
          case Symbol::Div: right = left / right; break;
          default:
            for (Eigen::Index r = 0; r < rows; ++r) right[r] = std::pow(left[r], right[r]);
            break;
        }
        break;
      }
    }
    if (!all_finite(stack.back())) return std::nullopt;
  }
  return Eigen::VectorXd(stack.back().matrix());
}

bool contains_variable(const ExprTree& tree, int column) {
  for (const auto& n : tree.nodes()) {
    if (n.token.symbol == Symbol::Var && n.token.var == column) return true;
  }
  return false;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

std::string to_infix(const ExprTree& tree, std::span<const double> constants) {
  if (static_cast<int>(constants.size()) != tree.constant_count()) {
    throw UsageError("to_infix: constant count mismatch");
  }
  std::string out;
  render(tree, 0, constants, out);
  return out;
}

}  // namespace symreg

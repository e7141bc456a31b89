#include "symreg/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "symreg/errors.hpp"

namespace symreg {

PolicyMode policy_mode_from_string(std::string_view name) {
  if (name == "power") return PolicyMode::Power;
  if (name == "paper_log") return PolicyMode::PaperLog;
  throw UsageError("unknown policy mode \"" + std::string(name) + "\" (power|paper_log)");
}

std::string_view to_string(PolicyMode mode) {
  return mode == PolicyMode::Power ? "power" : "paper_log";
}

FirstPlay first_play_from_string(std::string_view name) {
  if (name == "zero") return FirstPlay::Zero;
  if (name == "parent") return FirstPlay::Parent;
  if (name == "infinite") return FirstPlay::Infinite;
  throw UsageError("unknown first-play mode \"" + std::string(name) + "\" (zero|parent|infinite)");
}

std::string_view to_string(FirstPlay mode) {
  switch (mode) {
    case FirstPlay::Parent: return "parent";
    case FirstPlay::Infinite: return "infinite";
    default: return "zero";
  }
}

void MctsConfig::validate() const {
  if (!(c_puct > 0.0)) throw UsageError("search.c_puct must be positive");
  if (n_evaluate < 1) throw UsageError("search.n_evaluate must be >= 1");
  constraints.validate();
}

const Edge* Node::find(int token) const {
  auto it = std::lower_bound(edges.begin(), edges.end(), token,
                             [](const Edge& e, int t) { return e.token < t; });
  return it != edges.end() && it->token == token ? &*it : nullptr;
}

Edge* Node::find(int token) {
  return const_cast<Edge*>(std::as_const(*this).find(token));
}

double uct(long parent_visits, const Edge& child, double c_puct, double unvisited_q) {
  const double u = c_puct * child.prior * std::sqrt(static_cast<double>(parent_visits)) /
                   (1.0 + static_cast<double>(child.visits));
  return (child.visits > 0 ? child.q() : unvisited_q) + u;
}

std::vector<double> search_policy(std::span<const long> counts, double tau, PolicyMode mode) {
  if (!(tau > 0.0)) throw UsageError("search_policy: tau must be positive");
  long total = 0;
  long best = 0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw UsageError("search_policy: negative visit count");
    total += counts[i];
    if (counts[i] > best) {
      best = counts[i];
      argmax = i;
    }
  }
  if (total == 0) throw UsageError("search_policy: all visit counts are zero");

  std::vector<double> pi(counts.size(), 0.0);
  if (mode == PolicyMode::Power) {
    if (tau < 1e-3) {
      pi[argmax] = 1.0;
      return pi;
    }
    // Scale by the max count first so N^(1/tau) cannot overflow.
    double sum = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) continue;
      pi[i] = std::pow(static_cast<double>(counts[i]) / static_cast<double>(best), 1.0 / tau);
      sum += pi[i];
    }
    for (double& p : pi) p /= sum;
    return pi;
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double c = static_cast<double>(counts[i]);
    pi[i] = (counts[i] <= 1 ? std::log(c + 1.0) : std::log(c)) / tau;
    sum += pi[i];
  }
  for (double& p : pi) p /= sum;
  return pi;
}

SearchTree::SearchTree(const Vocabulary& vocab, MctsConfig cfg)
    : vocab_(&vocab), cfg_(std::move(cfg)), root_(std::make_unique<Node>()) {
  cfg_.validate();
}

const Node* SearchTree::find(std::span<const int> ids) const {
  const Node* node = root_.get();
  for (int id : ids) {
    const Edge* e = node->find(id);
    if (!e || !e->child) return nullptr;
    node = e->child.get();
  }
  return node;
}

std::optional<double> SearchTree::expand(const Traversal& state, Node& node, LeafEvaluator& eval) {
  if (node.expanded || state.is_complete()) return std::nullopt;
  const Mask mask = legal_mask(state, *vocab_, cfg_.constraints);
  const PolicyValue pv = eval.evaluate_state(state, mask);
  const std::vector<double> priors = apply_mask(pv.p, mask);
  node.edges.clear();
  for (int id = 0; id < vocab_->size(); ++id) {
    if (!mask[static_cast<std::size_t>(id)]) continue;
    Edge e;
    e.token = id;
    e.prior = priors[static_cast<std::size_t>(id)];
    node.edges.push_back(std::move(e));
  }
  node.expanded = true;
  return pv.v;
}

Node& SearchTree::child(Node& node, int token) {
  Edge* e = node.find(token);
  if (!e) throw UsageError("token " + std::to_string(token) + " is not a legal move here");
  if (!e->child) {
    e->child = std::make_unique<Node>();
    ++node_count_;
  }
  return *e->child;
}

double SearchTree::simulate_once(const Traversal& state, Node& node, LeafEvaluator& eval) {
  std::vector<Edge*> path;
  std::vector<Node*> nodes{&node};
  std::vector<int> tokens;
  Traversal st = state;
  Node* cur = &node;
  double value = 0.0;
  while (true) {
    if (st.is_complete()) {
      if (!cur->terminal_value) cur->terminal_value = eval.evaluate_complete(st);
      value = *cur->terminal_value;
      break;
    }
    if (!cur->expanded) {
      value = *expand(st, *cur, eval);
      break;
    }
    double unvisited_q = 0.0;
    if (cfg_.first_play == FirstPlay::Parent) {
      long n = 0;
      double w = 0.0;
      for (const Edge& e : cur->edges) {
        n += e.visits;
        w += e.value_sum;
      }
      if (n > 0) unvisited_q = w / static_cast<double>(n);
    } else if (cfg_.first_play == FirstPlay::Infinite) {
      // Values live in [0, 1], so this beats every visited edge while the
      // prior term still orders the unvisited ones.
      unvisited_q = 1e6;
    }
    Edge* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Edge& e : cur->edges) {
      const double s = uct(cur->visits, e, cfg_.c_puct, unvisited_q);
      if (s > best_score) {  // strict: ties keep the lowest token id
        best_score = s;
        best = &e;
      }
    }
    path.push_back(best);
    tokens.push_back(best->token);
    Node& next = child(*cur, best->token);
    st.push((*vocab_)[best->token]);
    cur = &next;
    nodes.push_back(cur);
  }
  for (Edge* e : path) {
    ++e->visits;
    e->value_sum += value;
  }
  for (Node* n : nodes) ++n->visits;
  if (tracing_) trace_.push_back(BackupEvent{vocab_->encode(state.tokens()), tokens, value});
  return value;
}

std::vector<long> SearchTree::run_simulations(const Traversal& state, Node& node,
                                              LeafEvaluator& eval, int n_evaluate) {
  if (n_evaluate < 1) throw UsageError("run_simulations: n_evaluate must be >= 1");
  if (state.is_complete()) throw UsageError("run_simulations on a complete traversal");
  if (!node.expanded) {
    expand(state, node, eval);
    ++node.visits;
  }
  for (int i = 0; i < n_evaluate && !eval.should_stop(); ++i) simulate_once(state, node, eval);
  std::vector<long> counts(static_cast<std::size_t>(vocab_->size()), 0);
  for (const Edge& e : node.edges) counts[static_cast<std::size_t>(e.token)] = e.visits;
  return counts;
}

void SearchTree::backpropagate_path(std::span<const int> ids, double value) {
  Node* cur = root_.get();
  ++cur->visits;
  for (int id : ids) {
    Edge* e = cur->find(id);
    if (!e) throw UsageError("backpropagate_path: path leaves the tree");
    ++e->visits;
    e->value_sum += value;
    cur = &child(*cur, id);
    ++cur->visits;
  }
  if (tracing_) trace_.push_back(BackupEvent{{}, std::vector<int>(ids.begin(), ids.end()), value});
}

}  // namespace symreg

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "symreg/constraints.hpp"
#include "symreg/model.hpp"
#include "symreg/traversal.hpp"

namespace symreg {

enum class PolicyMode { Power, PaperLog };

PolicyMode policy_mode_from_string(std::string_view name);
std::string_view to_string(PolicyMode mode);

/// Value assumed for an unvisited edge during selection. Zero: Q = 0.
/// Parent: the mean backed-up value of the node's visited edges.
/// Infinite: unvisited edges are always tried first (ties by prior, then id).
enum class FirstPlay { Zero, Parent, Infinite };

FirstPlay first_play_from_string(std::string_view name);
std::string_view to_string(FirstPlay mode);

struct MctsConfig {
  double c_puct = 1.0;
  int n_evaluate = 50;
  PolicyMode policy_mode = PolicyMode::Power;
  FirstPlay first_play = FirstPlay::Parent;
  ConstraintConfig constraints;

  void validate() const;
};

struct Node;

/// Statistics of one (state, action) edge.
struct Edge {
  int token = 0;         // vocabulary id
  double prior = 0.0;    // P(s, a)
  long visits = 0;       // N(s, a)
  double value_sum = 0;  // W(s, a)
  std::unique_ptr<Node> child;

  /// Mean backed-up value; 0 for an unvisited edge.
  double q() const { return visits > 0 ? value_sum / static_cast<double>(visits) : 0.0; }
};

struct Node {
  std::vector<Edge> edges;  // legal tokens only, ascending id
  bool expanded = false;
  long visits = 0;
  std::optional<double> terminal_value;  // cached reward of a complete expression

  Edge* find(int token);
  const Edge* find(int token) const;
};

/// Supplies network guidance for open states and exact rewards for complete
/// ones.
class LeafEvaluator {
 public:
  virtual ~LeafEvaluator() = default;
  virtual PolicyValue evaluate_state(const Traversal& state, const Mask& mask) = 0;
  virtual double evaluate_complete(const Traversal& expression) = 0;
  /// Polled between simulations; true aborts the remaining simulations.
  virtual bool should_stop() const { return false; }
};

/// Q + c_puct * P * sqrt(parent_N) / (1 + N). `unvisited_q` replaces Q
/// when N = 0.
double uct(long parent_visits, const Edge& child, double c_puct, double unvisited_q = 0.0);

/// Visit counts -> search policy. Power: N^(1/tau) normalised (tau below
/// 1e-3 is treated as the argmax limit). PaperLog: log(N^(1/tau))
/// normalised, with counts <= 1 contributing log(N + 1).
std::vector<double> search_policy(std::span<const long> counts, double tau, PolicyMode mode);

/// One backup event, recorded when tracing is on: the state the simulation
/// started from, the tokens it descended through and the value backed up.
struct BackupEvent {
  std::vector<int> start;
  std::vector<int> tokens;
  double value = 0.0;
};

class SearchTree {
 public:
  SearchTree(const Vocabulary& vocab, MctsConfig cfg);

  const Vocabulary& vocab() const { return *vocab_; }
  const MctsConfig& config() const { return cfg_; }
  Node& root() { return *root_; }
  const Node& root() const { return *root_; }
  std::size_t node_count() const { return node_count_; }

  /// Node reached from the root by `ids`, or nullptr.
  const Node* find(std::span<const int> ids) const;

  /// Expands `node` (state `state`) if it is open and unexpanded; returns the
  /// network value, or nullopt when nothing was done.
  std::optional<double> expand(const Traversal& state, Node& node, LeafEvaluator& eval);

  /// Select by argmax UCT down to an unexpanded or complete node, evaluate it,
  /// and back the value up along the traversed edges.
  double simulate_once(const Traversal& state, Node& node, LeafEvaluator& eval);

  /// Expands `node` first if needed, then runs n simulations. Returns the
  /// per-vocabulary edge visit counts of `node`.
  std::vector<long> run_simulations(const Traversal& state, Node& node, LeafEvaluator& eval,
                                    int n_evaluate);

  /// Child for `token`, creating the node if it does not exist yet.
  Node& child(Node& node, int token);

  /// Adds `value` to every edge from the root along `ids`.
  void backpropagate_path(std::span<const int> ids, double value);

  void set_tracing(bool on) { tracing_ = on; }
  const std::vector<BackupEvent>& trace() const { return trace_; }

 private:
  const Vocabulary* vocab_;
  MctsConfig cfg_;
  std::unique_ptr<Node> root_;
  std::size_t node_count_ = 1;
  bool tracing_ = false;
  std::vector<BackupEvent> trace_;
};

}  // namespace symreg

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symreg/dataset.hpp"
#include "symreg/mcts.hpp"
#include "symreg/model.hpp"
#include "symreg/objective.hpp"
#include "symreg/replay_buffer.hpp"
#include "symreg/rng.hpp"

namespace symreg {

struct ObjectiveConfig {
  double lambda = 0.1;
  ConstOptOptions constants;
};

struct RunConfig {
  double reward_threshold = 0.9999;  // T
  int max_episodes = 1000;
  double max_wall_seconds = 0.0;  // 0: no wall-clock budget
  double tau_early = 1.0;         // sampling temperature before switch_move
  double tau_late = 1.0;          // temperature of the recorded pi afterwards
  int switch_move = 4;
  std::uint64_t seed = 0;
  bool persistent_tree = true;
  bool stop_on_simulated_hit = true;
  std::size_t max_tree_nodes = 1'000'000;
  int parallel_episodes = 1;

  void validate() const;
};

/// Everything one search run needs besides data and vocabulary. The model's
/// vocab_size/token_arity/max_seq_len are filled from the vocabulary.
struct SearchConfig {
  ModelConfig model;
  MctsConfig mcts;
  ObjectiveConfig objective;
  RunConfig run;
  int batch_size = 64;
  std::size_t buffer_capacity = 1000;

  ModelConfig model_for(const Vocabulary& vocab) const;
  void validate() const;
};

struct BestExpression {
  std::vector<Token> tokens;
  std::vector<double> constants;
  FitMetrics metrics;
  std::string infix;

  bool empty() const { return tokens.empty(); }
};

struct MoveRecord {
  std::vector<int> state;
  std::vector<double> pi;
  Mask mask;
};

struct EpisodeRecord {
  std::vector<Token> traversal;
  std::vector<double> constants;
  double z = 0.0;
  std::vector<MoveRecord> moves;
  double wall_seconds = 0.0;
  bool interrupted = false;  // stopped early by a simulated hit or the wall budget

  std::vector<ReplayEntry> replay_entries() const;
};

/// Leaf evaluator backed by a model snapshot and the fit objective. Tracks
/// the best complete expression it has scored and the entropy of every
/// policy it produced.
class ExpressionScorer : public LeafEvaluator {
 public:
  ExpressionScorer(const Vocabulary& vocab, const Dataset& data, const ObjectiveConfig& objective,
                   double reward_threshold, bool stop_on_hit, std::uint64_t seed);

  void set_model(ModelSnapshot snapshot) { model_ = std::move(snapshot); }
  const ModelSnapshot& model() const { return model_; }

  PolicyValue evaluate_state(const Traversal& state, const Mask& mask) override;
  double evaluate_complete(const Traversal& expression) override;
  bool should_stop() const override { return stop_; }

  /// Full fit of a complete expression (constants and metrics).
  BestExpression fit(const std::vector<Token>& tokens) const;

  const BestExpression& best() const { return best_; }
  bool hit() const { return stop_; }
  void clear_stop() { stop_ = false; }
  double entropy_sum() const { return entropy_sum_; }
  long forward_calls() const { return forward_calls_; }
  long reward_calls() const { return reward_calls_; }

 private:
  const Vocabulary* vocab_;
  const Dataset* data_;
  ObjectiveConfig objective_;
  double threshold_;
  bool stop_on_hit_;
  std::uint64_t seed_;
  ModelSnapshot model_;
  BestExpression best_;
  bool stop_ = false;
  double entropy_sum_ = 0.0;
  long forward_calls_ = 0;
  long reward_calls_ = 0;
};

/// One self-search episode on `tree`: simulate, derive pi from visit counts,
/// pick a token (sampled before switch_move, argmax after), repeat until the
/// expression is complete, then score it and back its reward up the path.
EpisodeRecord run_episode(SearchTree& tree, ExpressionScorer& scorer, const SearchConfig& cfg,
                          Rng& rng, std::optional<double> deadline_seconds = std::nullopt);

struct TracePoint {
  int episode_index = 0;
  double reward = 0.0;
  double running_best = 0.0;
  double wall_seconds = 0.0;
};

struct SearchResult {
  BestExpression best;
  double best_z = 0.0;
  bool threshold_reached = false;  // best_z > T; equivalence is checked by the caller
  bool budget_exhausted = false;
  int episodes = 0;
  long train_steps = 0;
  long simulations = 0;
  int tree_resets = 0;
  double mean_policy_entropy = 0.0;  // over every network policy produced
  double wall_seconds = 0.0;
  std::vector<TracePoint> trace;
  std::shared_ptr<const PolicyValueNet> final_model;
};

/// The outer self-search loop: episodes feed the replay buffer, one training
/// step follows each completed episode, and the run stops once a reward
/// above T is found or the episode/time budget runs out.
SearchResult run_search(const Dataset& data, const Vocabulary& vocab, const SearchConfig& cfg);

}  // namespace symreg

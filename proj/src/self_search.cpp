#include "symreg/self_search.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <string>
#include <thread>

#include "symreg/errors.hpp"
#include "symreg/trainer.hpp"

namespace symreg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t hash_ids(std::span<const int> ids) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (int id : ids) h = splitmix64(h ^ static_cast<std::uint64_t>(id + 1));
  return h;
}

int sample_index(std::span<const double> pi, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] <= 0.0) continue;
    acc += pi[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

int argmax_index(std::span<const double> pi) {
  int best = 0;
  for (std::size_t i = 1; i < pi.size(); ++i) {
    if (pi[i] > pi[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

void RunConfig::validate() const {
  if (!(reward_threshold > 0.0 && reward_threshold <= 1.0)) {
    throw UsageError("run.reward_threshold must be in (0, 1]");
  }
  if (max_episodes < 0) throw UsageError("run.max_episodes must be >= 0");
  if (!(max_wall_seconds >= 0.0)) throw UsageError("run.max_wall_seconds must be >= 0");
  if (!(tau_early >= 0.0) || !(tau_late > 0.0)) {
    throw UsageError("run.tau_early must be >= 0 and run.tau_late > 0");
  }
  if (switch_move < 0) throw UsageError("run.switch_move must be >= 0");
  if (parallel_episodes < 1) throw UsageError("run.parallel_episodes must be >= 1");
  if (max_tree_nodes < 1) throw UsageError("run.max_tree_nodes must be >= 1");
}

ModelConfig SearchConfig::model_for(const Vocabulary& vocab) const {
  ModelConfig m = model;
  m.vocab_size = vocab.size();
  m.token_arity = vocab.arities();
  m.max_seq_len = std::max(m.max_seq_len, mcts.constraints.max_length + 1);
  return m;
}

void SearchConfig::validate() const {
  mcts.validate();
  run.validate();
  objective.constants.validate();
  if (!(objective.lambda >= 0.0 && objective.lambda <= 1.0)) {
    throw UsageError("objective.lambda must be in [0, 1]");
  }
  if (batch_size < 1) throw UsageError("model.batch_size must be >= 1");
  if (buffer_capacity < 1) throw UsageError("model.buffer_capacity must be >= 1");
}

std::vector<ReplayEntry> EpisodeRecord::replay_entries() const {
  std::vector<ReplayEntry> out;
  out.reserve(moves.size());
  for (const auto& m : moves) out.push_back(ReplayEntry{m.state, m.pi, z, m.mask});
  return out;
}

ExpressionScorer::ExpressionScorer(const Vocabulary& vocab, const Dataset& data,
                                   const ObjectiveConfig& objective, double reward_threshold,
                                   bool stop_on_hit, std::uint64_t seed)
    : vocab_(&vocab),
      data_(&data),
      objective_(objective),
      threshold_(reward_threshold),
      stop_on_hit_(stop_on_hit),
      seed_(seed) {}

PolicyValue ExpressionScorer::evaluate_state(const Traversal& state, const Mask& mask) {
  if (!model_) throw UsageError("ExpressionScorer: no model snapshot set");
  const std::vector<int> ids = vocab_->encode(state.tokens());
  PolicyValue pv = model_->forward(ids, mask);
  entropy_sum_ += entropy(pv.p);
  ++forward_calls_;
  return pv;
}

BestExpression ExpressionScorer::fit(const std::vector<Token>& tokens) const {
  const std::vector<int> ids = vocab_->encode(tokens);
  const ExprTree tree = ExprTree::build(tokens);
  ConstantFit cf = optimize_constants(tree, *data_, objective_.lambda, objective_.constants,
                                      derive_seed(seed_, "restarts", hash_ids(ids)));
  BestExpression out;
  out.tokens = tokens;
  out.constants = std::move(cf.constants);
  out.metrics = cf.metrics;
  out.infix = to_infix(tree, out.constants);
  return out;
}

double ExpressionScorer::evaluate_complete(const Traversal& expression) {
  ++reward_calls_;
  BestExpression e = fit(expression.tokens());
  const double z = e.metrics.valid ? e.metrics.reward : 0.0;
  const double best_z = best_.metrics.valid ? best_.metrics.reward : -1.0;
  if (z > best_z) best_ = std::move(e);
  if (stop_on_hit_ && z > threshold_) stop_ = true;
  return z;
}

EpisodeRecord run_episode(SearchTree& tree, ExpressionScorer& scorer, const SearchConfig& cfg,
                          Rng& rng, std::optional<double> deadline_seconds) {
  const auto start = Clock::now();
  const Vocabulary& vocab = tree.vocab();
  Traversal state(cfg.mcts.constraints.max_length);
  Node* node = &tree.root();
  EpisodeRecord rec;
  int move = 0;
  while (!state.is_complete()) {
    if (deadline_seconds && seconds_since(start) > *deadline_seconds) {
      rec.interrupted = true;
      break;
    }
    const std::vector<long> counts =
        tree.run_simulations(state, *node, scorer, cfg.mcts.n_evaluate);
    if (scorer.should_stop()) {
      rec.interrupted = true;
      break;
    }
    const bool sample = move < cfg.run.switch_move && cfg.run.tau_early > 0.0;
    const double tau = sample ? cfg.run.tau_early : cfg.run.tau_late;
    const Mask mask = legal_mask(state, vocab, cfg.mcts.constraints);
    const std::vector<double> pi =
        apply_mask(search_policy(counts, tau, cfg.mcts.policy_mode), mask);
    const int token = sample ? sample_index(pi, rng) : argmax_index(pi);
    rec.moves.push_back(MoveRecord{vocab.encode(state.tokens()), pi, mask});
    node = &tree.child(*node, token);
    state.push(vocab[token]);
    ++move;
  }
  rec.traversal = state.tokens();
  if (!rec.interrupted) {
    if (!node->terminal_value) node->terminal_value = scorer.evaluate_complete(state);
    rec.z = *node->terminal_value;
    const BestExpression& best = scorer.best();
    if (best.tokens == rec.traversal) {
      rec.constants = best.constants;
    } else {
      rec.constants = scorer.fit(rec.traversal).constants;
    }
    tree.backpropagate_path(vocab.encode(state.tokens()), rec.z);
  }
  rec.wall_seconds = seconds_since(start);
  return rec;
}

SearchResult run_search(const Dataset& data, const Vocabulary& vocab, const SearchConfig& cfg) {
  cfg.validate();
  if (data.rows() < 1) throw UsageError("run_search: empty dataset");
  if (vocab.n_variables() > data.n_variables()) {
    throw UsageError("run_search: vocabulary has more variables than the data");
  }
  const auto start = Clock::now();
  const RunConfig& run = cfg.run;
  const std::uint64_t seed = run.seed;

  Trainer trainer(PolicyValueNet::initialized(cfg.model_for(vocab), derive_seed(seed, "model")));
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng batch_rng(derive_seed(seed, "batch"));

  const int workers = run.parallel_episodes;
  std::vector<std::unique_ptr<SearchTree>> trees(static_cast<std::size_t>(workers));
  std::vector<std::unique_ptr<ExpressionScorer>> scorers;
  for (int w = 0; w < workers; ++w) {
    scorers.push_back(std::make_unique<ExpressionScorer>(
        vocab, data, cfg.objective, run.reward_threshold, run.stop_on_simulated_hit,
        derive_seed(seed, "restarts")));
  }

  SearchResult result;
  double running_best = 0.0;
  int episode = 0;
  std::optional<double> deadline;
  if (run.max_wall_seconds > 0.0) deadline = run.max_wall_seconds;

  while (episode < run.max_episodes) {
    if (deadline && seconds_since(start) > *deadline) {
      result.budget_exhausted = true;
      break;
    }
    const ModelSnapshot snapshot = trainer.snapshot();
    const int gen = std::min(workers, run.max_episodes - episode);
    std::vector<EpisodeRecord> records(static_cast<std::size_t>(gen));

    auto work = [&](int w) {
      auto& tree = trees[static_cast<std::size_t>(w)];
      if (!tree || !run.persistent_tree || tree->node_count() > run.max_tree_nodes) {
        if (tree && run.persistent_tree) ++result.tree_resets;
        tree = std::make_unique<SearchTree>(vocab, cfg.mcts);
      }
      ExpressionScorer& scorer = *scorers[static_cast<std::size_t>(w)];
      scorer.set_model(snapshot);
      Rng rng(derive_seed(seed, "episode", static_cast<std::uint64_t>(episode + w)));
      std::optional<double> remaining;
      if (deadline) remaining = *deadline - seconds_since(start);
      records[static_cast<std::size_t>(w)] = run_episode(*tree, scorer, cfg, rng, remaining);
    };
    if (gen == 1) {
      work(0);
    } else {
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(gen));
      std::vector<std::thread> threads;
      for (int w = 0; w < gen; ++w) {
        threads.emplace_back([&, w] {
          try {
            work(w);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    bool hit = false;
    int completed = 0;
    for (int w = 0; w < gen; ++w) {
      const EpisodeRecord& rec = records[static_cast<std::size_t>(w)];
      const ExpressionScorer& scorer = *scorers[static_cast<std::size_t>(w)];
      const BestExpression& sb = scorer.best();
      if (sb.metrics.valid && (result.best.empty() || sb.metrics.reward > result.best_z)) {
        result.best = sb;
        result.best_z = sb.metrics.reward;
      }
      double reward = rec.z;
      if (rec.interrupted) {
        if (!scorer.hit()) continue;  // wall budget cut the episode short
        reward = sb.metrics.reward;
        hit = true;
      } else {
        buffer.push(rec.replay_entries());
        ++completed;
        if (rec.z > run.reward_threshold) hit = true;
      }
      running_best = std::max({running_best, reward, result.best_z});
      result.trace.push_back(TracePoint{episode + w, reward, running_best, seconds_since(start)});
    }
    episode += gen;
    result.episodes = episode;
    if (hit) {
      result.threshold_reached = true;
      break;
    }
    for (int i = 0; i < completed; ++i) {
      const auto batch = buffer.sample_batch(static_cast<std::size_t>(cfg.batch_size), batch_rng);
      if (!batch.empty()) trainer.train_step(batch);
    }
  }
  if (!result.threshold_reached && result.best_z > run.reward_threshold) {
    result.threshold_reached = true;
  }
  if (!result.threshold_reached) result.budget_exhausted = true;

  double entropy_sum = 0.0;
  long forwards = 0;
  long rewards = 0;
  for (const auto& s : scorers) {
    entropy_sum += s->entropy_sum();
    forwards += s->forward_calls();
    rewards += s->reward_calls();
  }
  result.simulations = forwards + rewards;
  result.mean_policy_entropy = forwards > 0 ? entropy_sum / static_cast<double>(forwards) : 0.0;
  result.train_steps = trainer.steps();
  result.final_model = trainer.snapshot();
  result.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace symreg

#include <doctest.h>

#include <cmath>

#include "symreg/errors.hpp"
#include "symreg/self_search.hpp"
#include "test_helpers.hpp"

using namespace symreg;

namespace {

Dataset grid(int n, double (*f)(double)) {
  Dataset d;
  d.X.resize(n, 1);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * i / (n - 1);
    d.X(i, 0) = x;
    d.y(i) = f(x);
  }
  return d;
}

SearchConfig quick_config(std::uint64_t seed) {
  SearchConfig c;
  c.model.embed_dim = 16;
  c.model.heads = 2;
  c.model.ff_dim = 32;
  c.model.layers = 1;
  c.mcts.n_evaluate = 10;
  c.mcts.constraints.max_length = 10;
  c.objective.constants.restarts = 1;
  c.objective.constants.max_iterations = 50;
  c.run.max_episodes = 6;
  c.run.seed = seed;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST_SUITE("selfsearch") {
  TEST_CASE("identity target is solved with reward 1") {
    const Dataset d = grid(20, [](double x) { return x; });
    const Vocabulary v = testing::full_vocab(1, false);
    SearchConfig c = quick_config(3);
    c.run.max_episodes = 50;
    const SearchResult r = run_search(d, v, c);
    CHECK(r.threshold_reached);
    CHECK_FALSE(r.budget_exhausted);
    CHECK(r.best_z == doctest::Approx(1.0));
    CHECK(r.best.infix == "x1");
  }

  TEST_CASE("zero episode budget") {
    const Dataset d = grid(20, [](double x) { return std::sin(x); });
    SearchConfig c = quick_config(1);
    c.run.max_episodes = 0;
    const SearchResult r = run_search(d, testing::full_vocab(), c);
    CHECK(r.episodes == 0);
    CHECK(r.trace.empty());
    CHECK(r.best.empty());
    CHECK(r.budget_exhausted);
    CHECK(r.train_steps == 0);
  }

  TEST_CASE("same seed, same run; running best is monotone") {
    const Dataset d = grid(20, [](double x) { return std::exp(x) * x + std::sin(3.0 * x); });
    const Vocabulary v = testing::full_vocab();
    SearchConfig c = quick_config(9);
    c.run.reward_threshold = 1.0;  // unreachable: the full budget is used
    const SearchResult a = run_search(d, v, c);
    const SearchResult b = run_search(d, v, c);
    REQUIRE(a.trace.size() == 6);
    REQUIRE(b.trace.size() == 6);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].episode_index == static_cast<int>(i));
      CHECK(a.trace[i].reward == b.trace[i].reward);
      CHECK(a.trace[i].running_best == b.trace[i].running_best);
      if (i > 0) CHECK(a.trace[i].running_best >= a.trace[i - 1].running_best);
      CHECK(a.trace[i].running_best >= a.trace[i].reward);
    }
    CHECK(a.best.infix == b.best.infix);
    CHECK(a.best_z == b.best_z);
    CHECK(a.train_steps == 6);
    CHECK(a.simulations == b.simulations);
    CHECK(a.mean_policy_entropy == b.mean_policy_entropy);
    CHECK(a.mean_policy_entropy > 0.0);
    CHECK(a.budget_exhausted);

    c.run.seed = 10;
    const SearchResult other = run_search(d, v, c);
    bool differs = false;
    for (std::size_t i = 0; i < other.trace.size(); ++i) {
      differs = differs || other.trace[i].reward != a.trace[i].reward;
    }
    CHECK(differs);
  }

  TEST_CASE("episode record feeds consistent replay entries") {
    const Dataset d = grid(20, [](double x) { return x * x + x; });
    const Vocabulary v = testing::full_vocab();
    SearchConfig c = quick_config(4);
    c.run.stop_on_simulated_hit = false;
    SearchTree tree(v, c.mcts);
    ExpressionScorer scorer(v, d, c.objective, c.run.reward_threshold, false, 5);
    scorer.set_model(std::make_shared<const PolicyValueNet>(
        PolicyValueNet::initialized(c.model_for(v), 2)));
    Rng rng(8);
    const EpisodeRecord rec = run_episode(tree, scorer, c, rng);
    REQUIRE_FALSE(rec.interrupted);
    const Traversal done = Traversal::from_tokens(rec.traversal, c.mcts.constraints.max_length);
    CHECK(done.is_complete());
    CHECK(rec.moves.size() == rec.traversal.size());
    CHECK(rec.z >= 0.0);
    CHECK(rec.z <= 1.0);
    const auto entries = rec.replay_entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      CHECK(entries[i].z == rec.z);
      CHECK(entries[i].state.size() == i);
      double sum = 0.0;
      for (std::size_t k = 0; k < entries[i].pi.size(); ++k) {
        if (!entries[i].mask[k]) CHECK(entries[i].pi[k] == 0.0);
        sum += entries[i].pi[k];
      }
      CHECK(sum == doctest::Approx(1.0));
    }
    // The realised path was backed up with z on top of the simulations.
    const Node* leaf = tree.find(v.encode(rec.traversal));
    REQUIRE(leaf != nullptr);
    CHECK(leaf->terminal_value.has_value());
    CHECK(*leaf->terminal_value == rec.z);
  }

  TEST_CASE("configuration errors") {
    const Dataset d = grid(10, [](double x) { return x; });
    SearchConfig c = quick_config(1);
    c.run.reward_threshold = 0.0;
    CHECK_THROWS_AS(run_search(d, testing::full_vocab(), c), UsageError);
    c = quick_config(1);
    CHECK_THROWS_AS(run_search(d, testing::full_vocab(2, true), c), UsageError);
    c.mcts.n_evaluate = 0;
    CHECK_THROWS_AS(run_search(d, testing::full_vocab(), c), UsageError);
  }
}

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "symreg/errors.hpp"
#include "symreg/mcts.hpp"
#include "mcts_oracle.hpp"
#include "symreg/rng.hpp"
#include "test_helpers.hpp"

using namespace symreg;

namespace {

// Uniform-ish priors and a value that depends only on the state, so runs are
// reproducible and the bookkeeping can be recomputed from the trace.
class FakeEvaluator : public LeafEvaluator {
 public:
  explicit FakeEvaluator(const Vocabulary& v, bool flat = false) : vocab_(v), flat_(flat) {}

  PolicyValue evaluate_state(const Traversal& state, const Mask& mask) override {
    ++forwards;
    PolicyValue pv;
    pv.p.assign(mask.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      pv.p[i] = flat_ ? 1.0 : 1.0 + 0.1 * static_cast<double>(i % 3);
      sum += pv.p[i];
    }
    for (double& p : pv.p) p /= sum;
    pv.v = flat_ ? 0.0 : value_of(state);
    return pv;
  }

  double evaluate_complete(const Traversal& expression) override {
    ++completes;
    seen.insert(vocab_.encode(expression.tokens()));
    return flat_ ? 0.0 : value_of(expression);
  }

  int forwards = 0;
  int completes = 0;
  std::set<std::vector<int>> seen;

 private:
  double value_of(const Traversal& t) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (int id : vocab_.encode(t.tokens())) h = splitmix64(h ^ static_cast<std::uint64_t>(id));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  const Vocabulary& vocab_;
  bool flat_;
};

MctsConfig small_config(int max_length = 8) {
  MctsConfig c;
  c.c_puct = 1.5;
  c.n_evaluate = 20;
  c.constraints.max_length = max_length;
  return c;
}

}  // namespace

TEST_SUITE("mcts") {
  TEST_CASE("uct examples") {
    Edge fresh;
    fresh.prior = 0.35;
    CHECK(uct(4, fresh, 1.0) == doctest::Approx(0.7));
    Edge used;
    used.prior = 0.5;
    used.visits = 2;
    used.value_sum = 1.0;
    CHECK(uct(9, used, 1.0) == doctest::Approx(1.0));
    CHECK(uct(9, used, 2.0) == doctest::Approx(1.5));
    CHECK(uct(0, fresh, 1.0) == 0.0);
    CHECK(uct(4, fresh, 1.0, 0.6) == doctest::Approx(1.3));
    CHECK(uct(9, used, 1.0, 0.6) == doctest::Approx(1.0));
  }

  TEST_CASE("first-play modes") {
    CHECK(first_play_from_string("parent") == FirstPlay::Parent);
    CHECK(to_string(FirstPlay::Infinite) == "infinite");
    CHECK_THROWS_AS(first_play_from_string("half"), UsageError);

    const Vocabulary v = testing::full_vocab();
    MctsConfig c = small_config();
    c.first_play = FirstPlay::Infinite;
    SearchTree tree(v, c);
    FakeEvaluator eval(v);
    tree.run_simulations(Traversal(8), tree.root(), eval, 1);
    const int k = static_cast<int>(tree.root().edges.size());
    tree.run_simulations(Traversal(8), tree.root(), eval, k - 1);
    // Every legal root move has been tried exactly once.
    for (const Edge& e : tree.root().edges) CHECK(e.visits == 1);

    MctsConfig p = small_config();
    p.first_play = FirstPlay::Parent;
    SearchTree ptree(v, p);
    ptree.set_tracing(true);
    FakeEvaluator peval(v);
    ptree.run_simulations(Traversal(8), ptree.root(), peval, 200);
    const auto audit = testing::audit_tree(ptree);
    CHECK(audit.count_mismatches == 0);
    CHECK(audit.max_q_error <= 1e-12);
  }

  TEST_CASE("search policy") {
    const std::vector<long> c{8, 2};
    const auto p1 = search_policy(c, 1.0, PolicyMode::Power);
    CHECK(p1[0] == doctest::Approx(0.8));
    CHECK(p1[1] == doctest::Approx(0.2));
    const auto p2 = search_policy(c, 0.5, PolicyMode::Power);
    CHECK(p2[0] == doctest::Approx(64.0 / 68.0));
    const auto greedy = search_policy(std::vector<long>{3, 9, 9, 0}, 1e-6, PolicyMode::Power);
    CHECK(greedy == std::vector<double>{0.0, 1.0, 0.0, 0.0});

    const auto log1 = search_policy(std::vector<long>{1, 1}, 1.0, PolicyMode::PaperLog);
    CHECK(log1[0] == doctest::Approx(0.5));
    CHECK(log1[1] == doctest::Approx(0.5));
    const auto log2 = search_policy(std::vector<long>{1, 4, 0}, 1.0, PolicyMode::PaperLog);
    CHECK(log2[0] == doctest::Approx(std::log(2.0) / (std::log(2.0) + std::log(4.0))));
    CHECK(log2[2] == 0.0);

    CHECK_THROWS_AS(search_policy(std::vector<long>{0, 0}, 1.0, PolicyMode::Power), UsageError);
    CHECK_THROWS_AS(search_policy(c, 0.0, PolicyMode::Power), UsageError);
    CHECK_THROWS_AS(policy_mode_from_string("softmax"), UsageError);
  }

  TEST_CASE("visit counts add up and match the backup trace") {
    const Vocabulary v = testing::full_vocab(2, true);
    SearchTree tree(v, small_config());
    tree.set_tracing(true);
    FakeEvaluator eval(v);
    Traversal state(8);
    Node* node = &tree.root();
    std::vector<int> vocab_path;
    for (int move = 0; move < 3 && !state.is_complete(); ++move) {
      const auto counts = tree.run_simulations(state, *node, eval, 20);
      const long total = std::accumulate(counts.begin(), counts.end(), 0L);
      long edge_total = 0;
      for (const Edge& e : node->edges) edge_total += e.visits;
      CHECK(total == edge_total);
      // Expanded-on-entry node: one visit for the expansion, one per simulation.
      CHECK(node->visits == 1 + total);
      const int token = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      node = &tree.child(*node, token);
      state.push(v[token]);
      vocab_path.push_back(token);
    }
    auto audit = testing::audit_tree(tree);
    CHECK(audit.edges > 0);
    CHECK(audit.count_mismatches == 0);
    CHECK(audit.max_q_error <= 1e-12);
    tree.backpropagate_path(vocab_path, 0.5);
    audit = testing::audit_tree(tree);
    CHECK(audit.count_mismatches == 0);
    CHECK(audit.max_q_error <= 1e-12);
  }

  TEST_CASE("n_evaluate = 1 touches a single edge") {
    const Vocabulary v = testing::full_vocab();
    SearchTree tree(v, small_config());
    FakeEvaluator eval(v);
    const auto counts = tree.run_simulations(Traversal(8), tree.root(), eval, 1);
    CHECK(std::accumulate(counts.begin(), counts.end(), 0L) == 1);
    CHECK(std::count(counts.begin(), counts.end(), 1L) == 1);
    CHECK_THROWS_AS(tree.run_simulations(Traversal(8), tree.root(), eval, 0), UsageError);
  }

  TEST_CASE("illegal tokens never get visits") {
    const Vocabulary v = testing::full_vocab();
    SearchTree tree(v, small_config(4));
    FakeEvaluator eval(v);
    const Traversal state = Traversal::from_tokens(testing::toks({"add", "x1"}), 4);
    Node& node = tree.root();
    const auto counts = tree.run_simulations(state, node, eval, 30);
    const Mask mask = legal_mask(state, v, small_config(4).constraints);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (!mask[i]) CHECK(counts[i] == 0);
    }
  }

  TEST_CASE("ties go to the lowest id") {
    const Vocabulary v = testing::full_vocab();
    SearchTree tree(v, small_config());
    FakeEvaluator eval(v, true);
    tree.set_tracing(true);
    tree.run_simulations(Traversal(8), tree.root(), eval, 1);
    REQUIRE(tree.trace().size() == 1);
    CHECK(tree.trace()[0].tokens.front() == tree.root().edges.front().token);
  }

  TEST_CASE("terminal rewards are cached") {
    const Vocabulary v = testing::full_vocab();
    SearchTree tree(v, small_config(3));
    FakeEvaluator eval(v);
    for (int i = 0; i < 10; ++i) tree.run_simulations(Traversal(3), tree.root(), eval, 50);
    CHECK(eval.completes == static_cast<int>(eval.seen.size()));
  }

  TEST_CASE("reproducible across identical runs") {
    const Vocabulary v = testing::full_vocab(2, true);
    auto once = [&] {
      SearchTree tree(v, small_config());
      FakeEvaluator eval(v);
      return tree.run_simulations(Traversal(8), tree.root(), eval, 100);
    };
    CHECK(once() == once());
  }

  TEST_CASE("child rejects illegal moves") {
    const Vocabulary v = testing::full_vocab();
    SearchTree tree(v, small_config());
    FakeEvaluator eval(v);
    tree.run_simulations(Traversal(8), tree.root(), eval, 1);
    CHECK_THROWS_AS(tree.child(tree.root(), v.size() + 3), UsageError);
    CHECK_THROWS_AS(tree.backpropagate_path(std::vector<int>{v.size() + 3}, 1.0), UsageError);
  }
}

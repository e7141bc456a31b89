#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "gradient_check.hpp"
#include "symreg/errors.hpp"
#include "symreg/model.hpp"
#include "symreg/replay_buffer.hpp"
#include "symreg/trainer.hpp"
#include "test_helpers.hpp"

using namespace symreg;

namespace {

Mask all_legal(const Vocabulary& v) { return Mask(static_cast<std::size_t>(v.size()), true); }

PolicyValueNet default_net(const Vocabulary& v, std::uint64_t seed = 1) {
  ModelConfig m;
  m.vocab_size = v.size();
  m.token_arity = v.arities();
  return PolicyValueNet::initialized(m, seed);
}

}  // namespace

TEST_SUITE("guidance") {
  TEST_CASE("forward contract") {
    const Vocabulary v = testing::full_vocab(2, true);
    const PolicyValueNet net = default_net(v);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
      const ReplayEntry e = testing::random_entry(v, rng, 30);
      const PolicyValue out = net.forward(e.state, e.mask);
      double sum = 0.0;
      for (std::size_t k = 0; k < out.p.size(); ++k) {
        CHECK(out.p[k] >= 0.0);
        if (!e.mask[k]) CHECK(out.p[k] == 0.0);
        sum += out.p[k];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      CHECK(out.v >= 0.0);
      CHECK(out.v <= 1.0);
    }
  }

  TEST_CASE("single legal token gives a one-hot policy") {
    const Vocabulary v = testing::full_vocab();
    const PolicyValueNet net = default_net(v);
    Mask m(static_cast<std::size_t>(v.size()), false);
    m[3] = true;
    const PolicyValue out = net.forward(std::vector<int>{0}, m);
    for (std::size_t k = 0; k < out.p.size(); ++k) CHECK(out.p[k] == (k == 3 ? 1.0 : 0.0));
  }

  TEST_CASE("forward is deterministic and rejects bad input") {
    const Vocabulary v = testing::full_vocab();
    const PolicyValueNet net = default_net(v, 8);
    const std::vector<int> state{0, v.size() - 1};
    const PolicyValue a = net.forward(state, all_legal(v));
    const PolicyValue b = default_net(v, 8).forward(state, all_legal(v));
    CHECK(std::memcmp(a.p.data(), b.p.data(), a.p.size() * sizeof(double)) == 0);
    CHECK(a.v == b.v);
    CHECK_THROWS_AS(net.forward(std::vector<int>(40, 0), all_legal(v)), UsageError);
    CHECK_THROWS_AS(net.forward(std::vector<int>{v.size()}, all_legal(v)), UsageError);
  }

  TEST_CASE("loss examples") {
    PolicyValue onehot{{0.0, 1.0, 0.0}, 0.7};
    const std::vector<double> pi{0.0, 1.0, 0.0};
    CHECK(loss_terms(onehot, pi, 0.7, true).total == doctest::Approx(0.0));

    const int k = 4;
    PolicyValue uniform{std::vector<double>(k, 1.0 / k), 0.3};
    const std::vector<double> hot{1.0, 0.0, 0.0, 0.0};
    const LossParts on = loss_terms(uniform, hot, 0.3, true);
    CHECK(on.total == doctest::Approx(2.0 * std::log(4.0)));
    const LossParts off = loss_terms(uniform, hot, 0.3, false);
    CHECK(off.total == doctest::Approx(std::log(4.0)));
    CHECK(on.total - off.total == doctest::Approx(on.entropy));
  }

  TEST_CASE("loss is non-negative") {
    const Vocabulary v = testing::full_vocab();
    const PolicyValueNet net = default_net(v);
    Rng rng(12);
    for (int i = 0; i < 30; ++i) {
      const ReplayEntry e = testing::random_entry(v, rng, 30);
      CHECK(loss(net.forward(e.state, e.mask), e.pi, e.z, net) >= 0.0);
    }
  }

  TEST_CASE("analytic gradient matches central differences") {
    const Vocabulary v = testing::full_vocab(2, true);
    Rng rng(77);
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
      const PolicyValueNet net =
          PolicyValueNet::initialized(testing::tiny_model(v, draw % 2 == 0), 100 + draw, 0.3);
      std::vector<ReplayEntry> batch;
      for (int b = 0; b < 3; ++b) batch.push_back(testing::random_entry(v, rng, 11));
      const auto r = testing::check_gradient(net, batch, rng, 40);
      worst = std::max(worst, r.max_rel_error);
    }
    CHECK(worst <= 1e-4);
  }

  TEST_CASE("training overfits one repeated entry") {
    const Vocabulary v = testing::full_vocab();
    ModelConfig m = testing::tiny_model(v);
    m.embed_dim = 16;
    m.ff_dim = 32;
    m.learning_rate = 0.05;
    Rng rng(5);
    const ReplayEntry e = testing::random_entry(v, rng, 11);
    ReplayEntry hot = e;
    std::fill(hot.pi.begin(), hot.pi.end(), 0.0);
    for (std::size_t i = 0; i < hot.pi.size(); ++i) {
      if (hot.mask[i]) {
        hot.pi[i] = 1.0;
        break;
      }
    }
    hot.z = 0.9;
    Trainer trainer(PolicyValueNet::initialized(m, 3));
    const std::vector<ReplayEntry> batch{hot};
    const double initial = trainer.train_step(batch).mean_loss;
    double last = initial;
    for (int s = 1; s < 200; ++s) last = trainer.train_step(batch).mean_loss;
    CHECK(last <= 0.05 * initial);
    CHECK(trainer.steps() == 200);
  }

  TEST_CASE("empty batch is a usage error; snapshots are immutable") {
    const Vocabulary v = testing::full_vocab();
    Trainer trainer(default_net(v));
    CHECK_THROWS_AS(trainer.train_step({}), UsageError);
    const ModelSnapshot before = trainer.snapshot();
    const std::vector<double> copy(before->params().begin(), before->params().end());
    Rng rng(1);
    const std::vector<ReplayEntry> batch{testing::random_entry(v, rng, 30)};
    trainer.train_step(batch);
    CHECK(std::equal(copy.begin(), copy.end(), before->params().begin()));
    CHECK(trainer.snapshot() != before);
  }

  TEST_CASE("replay buffer") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 4; ++i) buf.push(ReplayEntry{{i}, {1.0}, 0.5, {true}});
    const auto all = buf.snapshot();
    REQUIRE(all.size() == 3);
    CHECK(all.front().state[0] == 1);
    CHECK(all.back().state[0] == 3);

    Rng rng(2);
    ReplayBuffer two(10);
    two.push(ReplayEntry{{7}, {1.0}, 0.1, {true}});
    two.push(ReplayEntry{{8}, {1.0}, 0.2, {true}});
    CHECK(two.sample_batch(5, rng).size() == 5);

    ReplayBuffer big(100);
    for (int i = 0; i < 20; ++i) big.push(ReplayEntry{{i}, {1.0}, 0.0, {true}});
    const auto batch = big.sample_batch(20, rng);
    std::vector<int> seen;
    for (const auto& e : batch) seen.push_back(e.state[0]);
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());

    ReplayBuffer empty(5);
    CHECK(empty.sample_batch(4, rng).empty());
    CHECK_THROWS(empty.sample_batch(0, rng));
  }

  TEST_CASE("mean entropy") {
    std::vector<std::vector<double>> hot{{1.0, 0.0}, {0.0, 1.0}};
    CHECK(mean_entropy(hot) == 0.0);
    std::vector<std::vector<double>> uni{std::vector<double>(12, 1.0 / 12)};
    CHECK(mean_entropy(uni) == doctest::Approx(2.4849).epsilon(1e-4));
  }

  TEST_CASE("checkpoint round trip is bitwise") {
    const Vocabulary v = testing::full_vocab(2, true);
    const PolicyValueNet net = default_net(v, 21);
    const auto path = (std::filesystem::temp_directory_path() / "symreg_ckpt_test.bin").string();
    save_checkpoint(net, path);
    const PolicyValueNet back = load_checkpoint(path);
    std::filesystem::remove(path);
    REQUIRE(back.param_count() == net.param_count());
    CHECK(std::memcmp(back.params().data(), net.params().data(),
                      net.param_count() * sizeof(double)) == 0);
    Rng rng(6);
    for (int i = 0; i < 5; ++i) {
      const ReplayEntry e = testing::random_entry(v, rng, 30);
      const PolicyValue a = net.forward(e.state, e.mask);
      const PolicyValue b = back.forward(e.state, e.mask);
      CHECK(std::memcmp(a.p.data(), b.p.data(), a.p.size() * sizeof(double)) == 0);
      CHECK(a.v == b.v);
    }
    CHECK_THROWS(load_checkpoint(path));
  }

  TEST_CASE("model config validation") {
    ModelConfig m;
    m.vocab_size = 5;
    m.token_arity = {2, 2, 1, 0, 0};
    m.embed_dim = 10;
    m.heads = 4;
    CHECK_THROWS(m.validate());
  }
}

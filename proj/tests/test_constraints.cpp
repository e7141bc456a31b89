#include <doctest.h>

#include <numeric>

#include "constraint_oracle.hpp"
#include "symreg/constraints.hpp"
#include "symreg/errors.hpp"
#include "symreg/rng.hpp"
#include "test_helpers.hpp"

using namespace symreg;
using testing::tok;
using testing::toks;

namespace {

bool allowed(const Mask& m, const Vocabulary& v, const char* name) {
  return m[static_cast<std::size_t>(*v.id_of(tok(name)))];
}

Mask mask_after(std::initializer_list<const char*> names, const Vocabulary& v,
                const ConstraintConfig& cfg = {}) {
  return legal_mask(Traversal::from_tokens(toks(names), cfg.max_length), v, cfg);
}

}  // namespace

TEST_SUITE("constraints") {
  TEST_CASE("inverse pairs") {
    const Vocabulary v = testing::full_vocab();
    CHECK_FALSE(allowed(mask_after({"exp"}, v), v, "log"));
    CHECK_FALSE(allowed(mask_after({"log"}, v), v, "exp"));
    CHECK(allowed(mask_after({"exp"}, v), v, "sqrt"));
    ConstraintConfig off;
    off.forbid_inverse_chain = false;
    CHECK(allowed(mask_after({"exp"}, v, off), v, "log"));
  }

  TEST_CASE("nested trig") {
    const Vocabulary v = testing::full_vocab();
    const Mask m = mask_after({"sin"}, v);
    CHECK_FALSE(allowed(m, v, "sin"));
    CHECK_FALSE(allowed(m, v, "cos"));
    // any ancestor, not just the parent
    const Mask deep = mask_after({"cos", "add", "x1"}, v);
    CHECK_FALSE(allowed(deep, v, "sin"));
    ConstraintConfig parent_only;
    parent_only.trig_any_ancestor = false;
    CHECK(allowed(mask_after({"cos", "add", "x1"}, v, parent_only), v, "sin"));
    CHECK_FALSE(allowed(mask_after({"cos"}, v, parent_only), v, "sin"));
  }

  TEST_CASE("trig directly under log or sqrt") {
    const Vocabulary v = testing::full_vocab();
    for (const char* p : {"log", "sqrt"}) {
      const Mask m = legal_mask(Traversal::from_tokens(toks({p}), 30), v, {});
      CHECK_FALSE(allowed(m, v, "sin"));
      CHECK_FALSE(allowed(m, v, "cos"));
      CHECK(allowed(m, v, "add"));
    }
  }

  TEST_CASE("length feasibility") {
    const Vocabulary v = testing::full_vocab();
    ConstraintConfig cfg;
    cfg.max_length = 3;
    // [add] has counter 2 and one free position beyond the two leaves it needs
    Mask m = mask_after({"add"}, v, cfg);
    for (int i = 0; i < v.size(); ++i) CHECK(m[static_cast<std::size_t>(i)] == (arity(v[i]) == 0));
    m = mask_after({}, v, cfg);
    CHECK(allowed(m, v, "add"));
    CHECK(allowed(m, v, "sin"));
    CHECK_THROWS(ConstraintConfig{2}.validate());
  }

  TEST_CASE("apply_mask examples") {
    auto r = apply_mask(std::vector<double>{0.5, 0.5}, Mask{true, false});
    CHECK(r == std::vector<double>{1.0, 0.0});
    r = apply_mask(std::vector<double>{0.25, 0.25, 0.25, 0.25}, Mask{true, true, false, false});
    CHECK(r[0] == doctest::Approx(0.5));
    CHECK(r[1] == doctest::Approx(0.5));
    CHECK(r[2] == 0.0);
    CHECK(r[3] == 0.0);
    r = apply_mask(std::vector<double>{0.0, 0.0, 1.0}, Mask{true, true, false});
    CHECK(r == std::vector<double>{0.5, 0.5, 0.0});
    CHECK_THROWS(apply_mask(std::vector<double>{0.5, 0.5}, Mask{false, false}));
  }

  TEST_CASE("fuzz: 10,000 masked rollouts") {
    Rng rng(2024);
    const Vocabulary v = testing::full_vocab(2, true);
    const ConstraintConfig cfg;
    int terminated = 0;
    int violating = 0;
    for (int r = 0; r < 10000; ++r) {
      Traversal t(cfg.max_length);
      while (!t.is_complete() && t.size() < cfg.max_length) {
        const Mask m = legal_mask(t, v, cfg);
        REQUIRE(std::any_of(m.begin(), m.end(), [](bool b) { return b; }));
        std::vector<double> p(static_cast<std::size_t>(v.size()));
        for (auto& x : p) x = rng.uniform01();
        const auto q = apply_mask(p, m);
        double sum = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
          REQUIRE((q[i] == 0.0) == !m[i]);
          sum += q[i];
        }
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
        double u = rng.uniform01();
        std::size_t pick = 0;
        for (; pick + 1 < q.size(); ++pick) {
          if (q[pick] > 0.0 && u < q[pick]) break;
          u -= q[pick];
        }
        while (!m[pick]) --pick;
        t.push(v[static_cast<int>(pick)]);
      }
      if (t.is_complete() && t.counter() == 0 && t.size() <= cfg.max_length) ++terminated;
      if (t.is_complete() && testing::violations(ExprTree::build(t)).total() > 0) ++violating;
    }
    CHECK(terminated == 10000);
    CHECK(violating == 0);
  }
}

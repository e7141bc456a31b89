#include <doctest.h>

#include <json.hpp>

#include "symreg/config.hpp"
#include "symreg/csv.hpp"
#include "symreg/errors.hpp"
#include "symreg/experiments.hpp"

using namespace symreg;

TEST_SUITE("cli") {
  TEST_CASE("config overlay") {
    const AppConfig c = parse_config(R"({"search":{"c_puct":2.5},"run":{"seed":9},
      "library":{"operators":["add","mul","sin"],"constant":false}})");
    CHECK(c.search.mcts.c_puct == 2.5);
    CHECK(c.search.run.seed == 9);
    CHECK(c.library.operators.size() == 3);
    CHECK_FALSE(c.library.constant);
    CHECK(c.search.mcts.n_evaluate == AppConfig{}.search.mcts.n_evaluate);
  }

  TEST_CASE("config round trip") {
    AppConfig c;
    c.search.model.learning_rate = 0.01;
    c.search.mcts.policy_mode = PolicyMode::PaperLog;
    c.search.objective.lambda = 0.3;
    const nlohmann::json j = config_to_json(c);
    CHECK(config_to_json(apply_config(j)) == j);
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(R"({"search":{"cpuct":1}})"), UsageError);
    CHECK_THROWS_AS(parse_config(R"({"searh":{}})"), UsageError);
    CHECK_THROWS_AS(parse_config(R"({"search":{"c_puct":"big"}})"), UsageError);
    CHECK_THROWS_AS(parse_config(R"({"search":{"c_puct":-1}})"), UsageError);
    CHECK_THROWS_AS(parse_config(R"({"library":{"operators":["tan"]}})"), UsageError);
    CHECK_THROWS_AS(parse_config("{"), UsageError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), DataError);
  }

  TEST_CASE("csv parsing") {
    const Dataset d = parse_csv("x1,x2,y\n1,2,3\n4,5.5,-6e-1\n");
    CHECK(d.rows() == 2);
    CHECK(d.n_variables() == 2);
    CHECK(d.X(1, 1) == 5.5);
    CHECK(d.y(1) == -0.6);
    CHECK(parse_csv("x1,y\r\n1,2\r\n3,4\r\n").rows() == 2);
  }

  TEST_CASE("csv errors name the location") {
    auto message = [](const char* text) {
      try {
        parse_csv(text, "data.csv");
      } catch (const DataError& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    CHECK(message("x1,y\n1,2\n3,abc\n").find("line 3") != std::string::npos);
    CHECK(message("x1,y\n1,2\n3\n").find("line 3") != std::string::npos);
    CHECK(message("a,y\n1,2\n3,4\n") != "no error");
    CHECK(message("x1,y\n1,nan\n3,4\n") != "no error");
    CHECK(message("x1,y\n1,2\n") != "no error");
    CHECK(message("") != "no error");
    CHECK_THROWS_AS(read_csv("/nonexistent/data.csv"), DataError);
  }

  TEST_CASE("ablation switches") {
    const AppConfig base;
    CHECK_FALSE(ablated(base, {"entropy"}).search.model.entropy_term);
    CHECK(ablated(base, {"snrmse"}).search.objective.lambda == 0.0);
    const AppConfig nc = ablated(base, {"constraints"});
    CHECK_FALSE(nc.search.mcts.constraints.forbid_nested_trig);
    CHECK(nc.search.mcts.constraints.max_length == base.search.mcts.constraints.max_length);
    CHECK_THROWS_AS(ablated(base, {"feasibility"}), UsageError);
    CHECK_THROWS_AS(ablated(base, {"bogus"}), UsageError);
  }

  TEST_CASE("bench report layout") {
    PairResult a;
    a.benchmark = "Nguyen-1";
    a.run = 0;
    a.recovered = true;
    a.r_squared = 1.0;
    a.episodes = 10;
    a.wall_seconds = 3.0;
    PairResult b = a;
    b.run = 1;
    b.recovered = false;
    b.r_squared.reset();
    const BenchRequest req{"nguyen-mini", 2, 7};
    const nlohmann::json r = bench_report(req, AppConfig{}, {a, b});
    CHECK(r["schema_version"] == 1);
    CHECK(r["command"] == "bench");
    CHECK(r["seed"] == 7);
    CHECK(r["rows"].size() == 2);
    CHECK(r["rows"][1]["r_squared"].is_null());
    const auto& agg = r["aggregates"][0];
    CHECK(agg["benchmark"] == "Nguyen-1");
    CHECK(agg["recovery_rate"] == 0.5);
    for (const auto& row : r["rows"]) CHECK_FALSE(row.contains("wall_seconds"));
    CHECK_FALSE(r.contains("wall_seconds"));
    CHECK(timing_report({a, b})["rows"][0]["wall_seconds"] == 3.0);
    const std::string text = dump_report(r);
    CHECK(text.back() == '\n');
    CHECK(nlohmann::json::parse(text) == r);
  }
}

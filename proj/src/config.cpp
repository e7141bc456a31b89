#include "symreg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

using nlohmann::json;

// Reads known keys of one section, rejecting anything else.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (!doc.contains(name_)) return;
    node_ = &doc.at(name_);
    if (!node_->is_object()) throw UsageError("config: section '" + name_ + "' must be an object");
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) throw UsageError("config: unknown key '" + name_ + "." + key + "'");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError("config: bad value for '" + name_ + "." + key + "'");
    }
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

Symbol symbol_named(const std::string& name, const std::string& where) {
  auto t = token_from_name(name);
  if (!t || (t->kind() != TokenKind::Binary && t->kind() != TokenKind::Unary)) {
    throw UsageError("config: '" + name + "' in " + where + " is not an operator");
  }
  return t->symbol;
}

std::string symbol_name(Symbol s) { return Token{s, 0}.name(); }

}  // namespace

void AppConfig::validate() const {
  search.validate();
  if (library.operators.empty()) throw UsageError("config: library.operators is empty");
  if (bench.threads < 1) throw UsageError("config: bench.threads must be >= 1");
}

AppConfig apply_config(const json& doc, AppConfig cfg) {
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  static const std::set<std::string> sections{"model",      "search", "objective", "constraints",
                                              "run",        "library", "bench"};
  for (const auto& [key, value] : doc.items()) {
    if (!sections.count(key)) throw UsageError("config: unknown section '" + key + "'");
  }
  SearchConfig& s = cfg.search;
  {
    Section m(doc, "model");
    m.read("embed_dim", s.model.embed_dim);
    m.read("layers", s.model.layers);
    m.read("heads", s.model.heads);
    m.read("ff_dim", s.model.ff_dim);
    m.read("max_seq_len", s.model.max_seq_len);
    m.read("l2", s.model.l2);
    m.read("learning_rate", s.model.learning_rate);
    m.read("entropy_term", s.model.entropy_term);
    m.read("optimizer", s.model.optimizer);
    m.read("batch_size", s.batch_size);
    m.read("buffer_capacity", s.buffer_capacity);
    m.finish();
  }
  {
    Section m(doc, "search");
    m.read("c_puct", s.mcts.c_puct);
    m.read("n_evaluate", s.mcts.n_evaluate);
    if (const json* pm = m.raw("policy_mode")) {
      if (!pm->is_string()) throw UsageError("config: search.policy_mode must be a string");
      s.mcts.policy_mode = policy_mode_from_string(pm->get<std::string>());
    }
    if (const json* fp = m.raw("first_play")) {
      if (!fp->is_string()) throw UsageError("config: search.first_play must be a string");
      s.mcts.first_play = first_play_from_string(fp->get<std::string>());
    }
    m.read("tau_early", s.run.tau_early);
    m.read("tau_late", s.run.tau_late);
    m.read("switch_move", s.run.switch_move);
    m.read("persistent_tree", s.run.persistent_tree);
    m.read("max_tree_nodes", s.run.max_tree_nodes);
    m.finish();
  }
  {
    Section m(doc, "objective");
    m.read("lambda", s.objective.lambda);
    m.read("restarts", s.objective.constants.restarts);
    m.read("max_iterations", s.objective.constants.max_iterations);
    m.read("init_low", s.objective.constants.init_low);
    m.read("init_high", s.objective.constants.init_high);
    m.read("gradient_step", s.objective.constants.gradient_step);
    m.read("convergence_tol", s.objective.constants.convergence_tol);
    m.finish();
  }
  {
    Section m(doc, "constraints");
    ConstraintConfig& c = s.mcts.constraints;
    m.read("max_length", c.max_length);
    m.read("forbid_inverse_chain", c.forbid_inverse_chain);
    m.read("forbid_nested_trig", c.forbid_nested_trig);
    m.read("trig_any_ancestor", c.trig_any_ancestor);
    m.read("forbid_negative_into_log_sqrt", c.forbid_negative_into_log_sqrt);
    if (const json* pairs = m.raw("inverse_pairs")) {
      std::vector<std::vector<std::string>> raw;
      try {
        raw = pairs->get<std::vector<std::vector<std::string>>>();
      } catch (const json::exception&) {
        throw UsageError("config: constraints.inverse_pairs must be a list of name pairs");
      }
      c.inverse_pairs.clear();
      for (const auto& p : raw) {
        if (p.size() != 2) throw UsageError("config: inverse pair needs exactly two names");
        c.inverse_pairs.emplace_back(symbol_named(p[0], "constraints.inverse_pairs"),
                                     symbol_named(p[1], "constraints.inverse_pairs"));
      }
    }
    m.finish();
  }
  {
    Section m(doc, "run");
    m.read("reward_threshold", s.run.reward_threshold);
    m.read("max_episodes", s.run.max_episodes);
    m.read("max_wall_seconds", s.run.max_wall_seconds);
    m.read("seed", s.run.seed);
    m.read("parallel_episodes", s.run.parallel_episodes);
    m.read("stop_on_simulated_hit", s.run.stop_on_simulated_hit);
    m.finish();
  }
  {
    Section m(doc, "library");
    if (const json* ops = m.raw("operators")) {
      std::vector<std::string> names;
      try {
        names = ops->get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw UsageError("config: library.operators must be a list of names");
      }
      cfg.library.operators.clear();
      for (const auto& n : names) {
        cfg.library.operators.push_back(symbol_named(n, "library.operators"));
      }
    }
    m.read("constant", cfg.library.constant);
    m.finish();
  }
  {
    Section m(doc, "bench");
    m.read("threads", cfg.bench.threads);
    m.finish();
  }
  cfg.validate();
  return cfg;
}

AppConfig parse_config(std::string_view json_text, AppConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: not valid JSON: ") + e.what());
  }
  return apply_config(doc, std::move(base));
}

AppConfig load_config(const std::string& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

json config_to_json(const AppConfig& cfg) {
  const SearchConfig& s = cfg.search;
  const ConstraintConfig& c = s.mcts.constraints;
  json pairs = json::array();
  for (const auto& [a, b] : c.inverse_pairs) pairs.push_back({symbol_name(a), symbol_name(b)});
  json ops = json::array();
  for (Symbol op : cfg.library.operators) ops.push_back(symbol_name(op));
  json doc;
  doc["model"] = {{"embed_dim", s.model.embed_dim},
                  {"layers", s.model.layers},
                  {"heads", s.model.heads},
                  {"ff_dim", s.model.ff_dim},
                  {"max_seq_len", s.model.max_seq_len},
                  {"l2", s.model.l2},
                  {"learning_rate", s.model.learning_rate},
                  {"entropy_term", s.model.entropy_term},
                  {"optimizer", s.model.optimizer},
                  {"batch_size", s.batch_size},
                  {"buffer_capacity", s.buffer_capacity}};
  doc["search"] = {{"c_puct", s.mcts.c_puct},
                   {"n_evaluate", s.mcts.n_evaluate},
                   {"policy_mode", std::string(to_string(s.mcts.policy_mode))},
                   {"first_play", std::string(to_string(s.mcts.first_play))},
                   {"tau_early", s.run.tau_early},
                   {"tau_late", s.run.tau_late},
                   {"switch_move", s.run.switch_move},
                   {"persistent_tree", s.run.persistent_tree},
                   {"max_tree_nodes", s.run.max_tree_nodes}};
  doc["objective"] = {{"lambda", s.objective.lambda},
                      {"restarts", s.objective.constants.restarts},
                      {"max_iterations", s.objective.constants.max_iterations},
                      {"init_low", s.objective.constants.init_low},
                      {"init_high", s.objective.constants.init_high},
                      {"gradient_step", s.objective.constants.gradient_step},
                      {"convergence_tol", s.objective.constants.convergence_tol}};
  doc["constraints"] = {{"max_length", c.max_length},
                        {"forbid_inverse_chain", c.forbid_inverse_chain},
                        {"forbid_nested_trig", c.forbid_nested_trig},
                        {"trig_any_ancestor", c.trig_any_ancestor},
                        {"forbid_negative_into_log_sqrt", c.forbid_negative_into_log_sqrt},
                        {"inverse_pairs", pairs}};
  doc["run"] = {{"reward_threshold", s.run.reward_threshold},
                {"max_episodes", s.run.max_episodes},
                {"max_wall_seconds", s.run.max_wall_seconds},
                {"seed", s.run.seed},
                {"parallel_episodes", s.run.parallel_episodes},
                {"stop_on_simulated_hit", s.run.stop_on_simulated_hit}};
  doc["library"] = {{"operators", ops}, {"constant", cfg.library.constant}};
  doc["bench"] = {{"threads", cfg.bench.threads}};
  return doc;
}

}  // namespace symreg

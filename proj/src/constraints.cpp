#include "symreg/constraints.hpp"

#include <algorithm>
#include <string>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

bool is_inverse_pair(const ConstraintConfig& cfg, Symbol parent, Symbol child) {
  return std::any_of(cfg.inverse_pairs.begin(), cfg.inverse_pairs.end(), [&](const auto& p) {
    return (p.first == parent && p.second == child) || (p.second == parent && p.first == child);
  });
}

}  // namespace

ConstraintConfig ConstraintConfig::feasibility_only(int max_length) {
  ConstraintConfig cfg;
  cfg.max_length = max_length;
  cfg.forbid_inverse_chain = false;
  cfg.forbid_nested_trig = false;
  cfg.forbid_negative_into_log_sqrt = false;
  return cfg;
}

void ConstraintConfig::validate() const {
  if (max_length < 3) throw UsageError("constraints.max_length must be >= 3");
}

Mask legal_mask(const Traversal& traversal, const Vocabulary& vocab, const ConstraintConfig& cfg) {
  if (traversal.is_complete()) throw UsageError("legal_mask of a complete traversal");
  const int len = traversal.size();
  if (len >= cfg.max_length) throw UsageError("legal_mask: traversal already at max_length");

  const std::vector<Token> ancestors = pending_ancestors(traversal.tokens());
  const bool has_parent = !ancestors.empty();
  const Token parent = has_parent ? ancestors.back() : Token{};
  const bool under_trig = std::any_of(ancestors.begin(), ancestors.end(), is_trig);

  Mask mask(static_cast<std::size_t>(vocab.size()), true);
  bool any = false;
  for (int id = 0; id < vocab.size(); ++id) {
    const Token& t = vocab[id];
    bool ok = true;
    // Length feasibility: every open slot still needs at least one leaf.
    const int counter_after = traversal.counter() + arity(t) - 1;
    if (counter_after > cfg.max_length - (len + 1)) ok = false;

    if (ok && has_parent && cfg.forbid_inverse_chain && t.kind() == TokenKind::Unary &&
        parent.kind() == TokenKind::Unary && is_inverse_pair(cfg, parent.symbol, t.symbol)) {
      ok = false;
    }
    if (ok && cfg.forbid_nested_trig && is_trig(t)) {
      const bool nested = cfg.trig_any_ancestor ? under_trig : (has_parent && is_trig(parent));
      if (nested) ok = false;
    }
    if (ok && has_parent && cfg.forbid_negative_into_log_sqrt && is_trig(t) &&
        (parent.symbol == Symbol::Log || parent.symbol == Symbol::Sqrt)) {
      ok = false;
    }
    mask[static_cast<std::size_t>(id)] = ok;
    any = any || ok;
  }
  if (!any) {
    // Leaves always satisfy feasibility while len < max_length.
    for (int id = 0; id < vocab.size(); ++id) {
      mask[static_cast<std::size_t>(id)] = arity(vocab[id]) == 0;
    }
  }
  return mask;
}

std::vector<double> apply_mask(std::span<const double> probs, const Mask& mask) {
  if (probs.size() != mask.size()) throw UsageError("apply_mask: size mismatch");
  std::vector<double> out(probs.size(), 0.0);
  double total = 0.0;
  int legal = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i]) {
      out[i] = probs[i] > 0.0 ? probs[i] : 0.0;
      total += out[i];
      ++legal;
    }
  }
  if (legal == 0) throw std::logic_error("apply_mask: every entry is masked out");
  if (total > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= total;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? 1.0 / legal : 0.0;
  }
  return out;
}

}  // namespace symreg

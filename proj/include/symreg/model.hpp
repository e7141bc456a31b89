#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symreg/constraints.hpp"

namespace symreg {

struct ModelConfig {
  int vocab_size = 0;
  std::vector<int> token_arity;  // arity of each vocabulary id
  int embed_dim = 64;
  int layers = 2;
  int heads = 4;
  int ff_dim = 128;
  int max_seq_len = 32;  // includes the begin-of-sequence position
  double l2 = 1e-4;      // xi
  double learning_rate = 1e-3;
  bool entropy_term = true;
  std::string optimizer = "sgd";  // "sgd" or "adam"

  void validate() const;
  int padding_id() const { return vocab_size; }
  int begin_id() const { return vocab_size + 1; }
};

struct PolicyValue {
  std::vector<double> p;  // simplex over the vocabulary, 0 on masked ids
  double v = 0.0;         // in [0, 1]
};

/// Location of one named tensor inside the flat parameter vector.
struct TensorSlot {
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

struct ParamLayout {
  struct Layer {
    TensorSlot ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w_1, b_1, w_2, b_2;
  };
  TensorSlot tok_emb, pos_emb, parent_emb, sibling_emb;
  std::vector<Layer> layers;
  TensorSlot lnf_g, lnf_b, w_policy, b_policy, w_value, b_value;
  std::size_t total = 0;

  static ParamLayout make(const ModelConfig& cfg);
  std::vector<std::pair<std::string, TensorSlot>> named() const;
};

struct LossParts {
  double value = 0.0;      // (z - v)^2
  double policy = 0.0;     // -pi^T log p
  double entropy = 0.0;    // -p^T log p (reported even when not in the loss)
  double total = 0.0;      // data terms actually in the loss (no L2)
};

/// Causal self-attention policy/value model over a partial traversal.
/// Input: [BOS, t_1..t_n]; the final position additionally receives learned
/// embeddings of the next slot's parent and left-sibling tokens.
class PolicyValueNet {
 public:
  explicit PolicyValueNet(ModelConfig cfg);
  /// Small-normal initialisation (std 0.02, LayerNorm gains 1).
  static PolicyValueNet initialized(ModelConfig cfg, std::uint64_t seed, double stddev = 0.02);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Deterministic; throws UsageError when the state is too long, contains an
  /// unknown id, or the mask admits no token.
  PolicyValue forward(std::span<const int> state, const Mask& mask) const;

  /// Data terms of the loss for one (state, pi, z) sample; accumulates
  /// d(loss)/d(params) into `grad` (same layout as params()).
  LossParts loss_and_gradient(std::span<const int> state, const Mask& mask,
                              std::span<const double> pi, double z,
                              std::span<double> grad) const;

  double squared_norm() const;

 private:
  struct Cache;
  void run_forward(std::span<const int> state, const Mask& mask, Cache& cache) const;

  ModelConfig cfg_;
  ParamLayout layout_;
  std::vector<double> params_;
};

using ModelSnapshot = std::shared_ptr<const PolicyValueNet>;

/// Full loss for one sample: data terms plus xi * ||theta||^2.
double loss(const PolicyValue& out, std::span<const double> pi, double z,
            const PolicyValueNet& net);

/// Data terms computed from an already evaluated output.
LossParts loss_terms(const PolicyValue& out, std::span<const double> pi, double z,
                     bool entropy_term);

/// -p^T log p with natural log; zero entries contribute nothing.
double entropy(std::span<const double> p);
double mean_entropy(std::span<const std::vector<double>> ps);

/// Checkpoint I/O; format described in docs/checkpoint.md.
void save_checkpoint(const PolicyValueNet& net, const std::string& path);
PolicyValueNet load_checkpoint(const std::string& path);

}  // namespace symreg

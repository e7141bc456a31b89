#pragma once

#include <memory>
#include <span>
#include <vector>

#include "symreg/model.hpp"
#include "symreg/replay_buffer.hpp"

namespace symreg {

struct TrainStats {
  double mean_loss = 0.0;     // includes the L2 term
  double mean_entropy = 0.0;  // of the predicted p over the batch
  bool skipped = false;       // non-finite loss or gradient; params untouched
};

/// Mean loss over `batch` (data terms averaged, plus xi * ||theta||^2) and
/// its gradient. Returns the loss; `grad` is resized to the parameter count.
double batch_loss_and_gradient(const PolicyValueNet& net, std::span<const ReplayEntry> batch,
                               std::vector<double>& grad, double* mean_entropy = nullptr);

/// Single-writer owner of the trainable parameters. Episodes read immutable
/// snapshots; train_step never mutates a snapshot already handed out.
class Trainer {
 public:
  explicit Trainer(PolicyValueNet net);

  TrainStats train_step(std::span<const ReplayEntry> batch);

  const PolicyValueNet& net() const { return *current_; }
  ModelSnapshot snapshot() const { return current_; }
  long steps() const { return steps_; }

 private:
  std::shared_ptr<const PolicyValueNet> current_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  long steps_ = 0;
};

}  // namespace symreg

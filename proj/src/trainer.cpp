#include "symreg/trainer.hpp"

#include <cmath>

#include "symreg/errors.hpp"

namespace symreg {

double batch_loss_and_gradient(const PolicyValueNet& net, std::span<const ReplayEntry> batch,
                               std::vector<double>& grad, double* mean_entropy) {
  if (batch.empty()) throw UsageError("train_step: empty batch");
  grad.assign(net.param_count(), 0.0);
  double data = 0.0;
  double ent = 0.0;
  for (const auto& e : batch) {
    const LossParts parts = net.loss_and_gradient(e.state, e.mask, e.pi, e.z, grad);
    data += parts.total;
    ent += parts.entropy;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  const double xi = net.config().l2;
  const auto params = net.params();
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += 2.0 * xi * params[i];
  if (mean_entropy) *mean_entropy = ent * inv;
  return data * inv + xi * net.squared_norm();
}

Trainer::Trainer(PolicyValueNet net)
    : current_(std::make_shared<const PolicyValueNet>(std::move(net))) {}

TrainStats Trainer::train_step(std::span<const ReplayEntry> batch) {
  std::vector<double> grad;
  TrainStats stats;
  stats.mean_loss = batch_loss_and_gradient(*current_, batch, grad, &stats.mean_entropy);
  bool finite = std::isfinite(stats.mean_loss);
  for (double g : grad) finite = finite && std::isfinite(g);
  if (!finite) {
    stats.skipped = true;
    return stats;
  }

  // Copy-on-write: snapshots held by running episodes stay untouched.
  auto next = std::make_shared<PolicyValueNet>(*current_);
  auto params = next->params();
  const ModelConfig& cfg = next->config();
  ++steps_;
  if (cfg.optimizer == "adam") {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (adam_m_.empty()) {
      adam_m_.assign(params.size(), 0.0);
      adam_v_.assign(params.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      adam_m_[i] = b1 * adam_m_[i] + (1.0 - b1) * grad[i];
      adam_v_[i] = b2 * adam_v_[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] -= cfg.learning_rate * (adam_m_[i] / c1) / (std::sqrt(adam_v_[i] / c2) + eps);
    }
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * grad[i];
  }
  current_ = std::move(next);
  return stats;
}

}  // namespace symreg

#include "symreg/replay_buffer.hpp"

#include <numeric>

#include "symreg/errors.hpp"

namespace symreg {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw UsageError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(ReplayEntry entry) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(entry));
  while (entries_.size() > capacity_) entries_.pop_front();
}

void ReplayBuffer::push(std::span<const ReplayEntry> entries) {
  std::lock_guard lock(mutex_);
  for (const auto& e : entries) {
    entries_.push_back(e);
    while (entries_.size() > capacity_) entries_.pop_front();
  }
}

std::vector<ReplayEntry> ReplayBuffer::sample_batch(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) throw UsageError("sample_batch: batch_size must be >= 1");
  std::lock_guard lock(mutex_);
  std::vector<ReplayEntry> out;
  const std::size_t n = entries_.size();
  if (n == 0) return out;
  out.reserve(batch_size);
  if (n < batch_size) {
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(entries_[rng.below(n)]);
    return out;
  }
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
    out.push_back(entries_[idx[i]]);
  }
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<ReplayEntry> ReplayBuffer::snapshot() const {
  std::lock_guard lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

}  // namespace symreg

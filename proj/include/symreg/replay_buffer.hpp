#pragma once

#include <cstddef>
#include <deque>
#include <mutex>
#include <span>
#include <vector>

#include "symreg/constraints.hpp"
#include "symreg/rng.hpp"

namespace symreg {

/// One training triple (s, pi, z). The legal mask of s is kept alongside so
/// the trainer can rebuild the masked policy without the grammar.
struct ReplayEntry {
  std::vector<int> state;
  std::vector<double> pi;
  double z = 0.0;
  Mask mask;
};

/// Bounded FIFO of replay entries; oldest entries are evicted first. Safe for
/// concurrent pushes and sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000);

  void push(ReplayEntry entry);
  void push(std::span<const ReplayEntry> entries);

  /// Uniform draws: with replacement when fewer than batch_size entries are
  /// stored, without replacement otherwise. Empty buffer -> empty batch.
  std::vector<ReplayEntry> sample_batch(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::vector<ReplayEntry> snapshot() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::deque<ReplayEntry> entries_;
};

}  // namespace symreg

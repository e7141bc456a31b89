#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace symreg {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of a named, indexed substream of `root`. All run randomness is
/// derived from one root seed this way so reports are reproducible.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

/// Thin wrapper over mt19937_64 with platform-independent real draws.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on [low, high].
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

}  // namespace symreg

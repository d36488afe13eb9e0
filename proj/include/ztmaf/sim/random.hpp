#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ztmaf::sim {

/// Seed for one named stream: every random consumer gets its own
/// (master, purpose, index) stream so adding entities never shifts others.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0);

/// mt19937_64 with hand-written distributions; the standard library's
/// distributions are not bit-identical across implementations.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0)
    : engine_(derive_seed(master, purpose, index))
  {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0,1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Exponential with the given rate (1/mean).
  double exponential(double rate);
  bool   bernoulli(double p) { return uniform01() < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace ztmaf::sim

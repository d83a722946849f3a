#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace denn {

/// xoshiro256** (Blackman & Vigna), seeded by expanding a 64-bit seed with
/// splitmix64. Every derived draw (uniform, bounded integer, normal) is
/// implemented here rather than through <random> distributions, whose output
/// differs across standard library implementations. Same seed, same stream on
/// every platform.
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  static Rng from_state(const State& state);
  const State& state() const noexcept { return s_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform integer in [0, bound). Unbiased (modulo with rejection). bound > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p);

  /// Standard normal via the Marsaglia polar method. The second variate of
  /// each pair is discarded so that state() captures the generator fully.
  double normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent child generator; advances this one.
  Rng split();

 private:
  State s_{};
};

}  // namespace denn

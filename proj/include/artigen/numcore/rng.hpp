#pragma once

#include <cstddef>
#include <cstdint>

namespace artigen::numcore {

// Counter-based generator: the i-th draw is a pure function of (key, i), so a
// stream is fully described by its key and position and never depends on how
// many other streams exist. Keys derive from a seed and a stream id.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal() noexcept;
  // Uniform integer in [0, n), unbiased.
  std::size_t below(std::size_t n);
  // -1 or +1 with equal probability.
  int sign() noexcept { return (next_u64() >> 63) ? 1 : -1; }

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream_id) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }
  void seek(std::uint64_t position) noexcept { counter_ = position; }

  static Rng from_state(std::uint64_t key, std::uint64_t position) noexcept;

  bool operator==(const Rng&) const = default;

 private:
  Rng() = default;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace artigen::numcore

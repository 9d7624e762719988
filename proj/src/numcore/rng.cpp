#include "artigen/numcore/rng.hpp"

#include <cmath>
#include <numbers>

#include "artigen/error.hpp"

namespace artigen::numcore {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // SplitMix64 finalizer.
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))), counter_(0) {}

Rng Rng::from_state(std::uint64_t key, std::uint64_t position) noexcept {
  Rng r;
  r.key_ = key;
  r.counter_ = position;
  return r;
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::below(0)");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Rejection on the largest multiple of bound.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

Rng Rng::split(std::uint64_t stream_id) const noexcept {
  Rng child;
  child.key_ = mix64(key_ ^ mix64(stream_id ^ 0xA0761D6478BD642FULL));
  child.counter_ = 0;
  return child;
}

}  // namespace artigen::numcore

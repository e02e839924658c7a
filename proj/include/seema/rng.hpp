#pragma once

#include <cmath>
#include <cstdint>

#include "seema/numerics.hpp"

namespace seema {

namespace detail {

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator. A stream is identified by a 64-bit key; output i
// is mix(key + i * gamma), so streams can be replayed and split without
// shared state. derive() builds a sub-stream key from (key, tag), which makes
// draws a pure function of (seed, hypothesis, trial, role, sensor) and keeps
// parallel runs bit-reproducible regardless of scheduling.
class Rng {
public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  Rng derive(std::uint64_t tag) const {
    return Rng(detail::mix64(key_ ^ detail::mix64(tag + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(key_ + counter_);
  }

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Rayleigh with received power P_r = E[h^2], by inverse CDF.
  double rayleigh(double received_power) {
    return std::sqrt(-received_power * std::log(uniform()));
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace seema

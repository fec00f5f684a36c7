#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace divaug {

/// Seeded random stream with cheap, order-independent derivation of child
/// streams. A child is a pure function of (parent key, domain, index), so the
/// stream for e.g. (epoch, image, candidate) is the same no matter which
/// thread builds it or in which order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Child stream keyed by (domain, index). Does not advance this stream.
  [[nodiscard]] RandomStream fork(std::uint64_t domain, std::uint64_t index = 0) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Consumes exactly one draw regardless of p.
  bool bernoulli(double p);

  /// +1 or -1 with equal probability.
  int sign();

  [[nodiscard]] std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace divaug

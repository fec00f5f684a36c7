#include "divaug/random.hpp"

#include <limits>

#include "divaug/error.hpp"

namespace divaug {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : key_(mix64(seed)), engine_(key_) {}

RandomStream RandomStream::fork(std::uint64_t domain, std::uint64_t index) const {
  RandomStream child(0);
  child.key_ = mix64(key_ ^ mix64(domain * 0xd1b54a32d192ed03ULL + mix64(index)));
  child.engine_.seed(child.key_);
  return child;
}

std::uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw InvalidArgument("uniform_index: empty range");
  const std::uint64_t range = n;
  // Rejection keeps the draw unbiased for ranges that do not divide 2^64.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % range);
}

bool RandomStream::bernoulli(double p) { return uniform() < p; }

int RandomStream::sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

}  // namespace divaug

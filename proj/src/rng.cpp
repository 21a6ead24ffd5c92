#include "fbmlt/rng.h"

namespace fbmlt {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  state = out ^ a;
  out = splitmix64(state);
  state = out ^ b;
  return splitmix64(state);
}

void NormalStream::fill(std::span<double> out) {
  for (auto& v : out) v = normal_(engine_);
}

} // namespace fbmlt

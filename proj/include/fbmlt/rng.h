#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fbmlt {

/// One SplitMix64 step: advances state and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Substream seed for (seed, a, b). Each argument is absorbed through a
/// separate SplitMix64 round, so (seed, r, i) triples map to decorrelated
/// 64-bit seeds. Replication r of a master seed uses derive_seed(seed, r);
/// component i of that replication uses derive_seed(path_seed, i).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Seeded standard-normal stream. Not shared between threads.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return normal_(engine_); }
  void fill(std::span<double> out);
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t index(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace fbmlt

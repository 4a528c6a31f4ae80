#pragma once

#include <array>
#include <cstdint>

namespace driftkan {

// xoshiro256** seeded through splitmix64. Portable and bit-reproducible,
// unlike the distributions in <random>.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Box-Muller; caches the second variate.
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace driftkan

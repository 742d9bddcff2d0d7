#include "dualpath/rng.hpp"

#include <cmath>

namespace dualpath {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream make_stream(std::uint64_t master_seed, std::uint64_t index) {
  const std::uint64_t a = splitmix64(master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return RngStream(seq);
}

double uniform01(RngStream& rng) {
  // 53 random mantissa bits, [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double unit_exponential(RngStream& rng) { return -std::log1p(-uniform01(rng)); }

std::uint64_t poisson_count(RngStream& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

}  // namespace dualpath

#pragma once

#include <cstdint>
#include <random>

namespace dualpath {

/// Per-task random stream. Every stochastic routine takes one of these by
/// reference; nothing in the library owns global RNG state.
using RngStream = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Stream for task `index` under `master_seed`. Streams for different indices
/// are decorrelated and depend only on the pair, never on scheduling.
RngStream make_stream(std::uint64_t master_seed, std::uint64_t index);

double uniform01(RngStream& rng);
double unit_exponential(RngStream& rng);
std::uint64_t poisson_count(RngStream& rng, double mean);

}  // namespace dualpath

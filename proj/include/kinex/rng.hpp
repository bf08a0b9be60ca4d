#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>

namespace kinex {

using Rng = std::mt19937_64;

// Independent stream for replica `stream` of a run seeded with `master_seed`.
Rng make_rng(std::uint64_t master_seed, std::uint64_t stream = 0);

// 53-bit uniform on [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t n);

// Ordered pair of distinct indices, uniform over the N(N-1) choices.
std::pair<std::size_t, std::size_t> uniform_pair(Rng& rng, std::size_t n);

double exponential(Rng& rng, double mean);

}  // namespace kinex

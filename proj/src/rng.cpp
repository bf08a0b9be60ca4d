#include "kinex/rng.hpp"

namespace kinex {

Rng make_rng(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  return d(rng);
}

std::pair<std::size_t, std::size_t> uniform_pair(Rng& rng, std::size_t n) {
  const std::size_t i = uniform_index(rng, n);
  std::size_t j = uniform_index(rng, n - 1);
  if (j >= i) ++j;
  return {i, j};
}

double exponential(Rng& rng, double mean) {
  std::exponential_distribution<double> d(1.0 / mean);
  return d(rng);
}

}  // namespace kinex

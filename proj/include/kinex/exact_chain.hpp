#pragma once

// Exact analysis of the discrete-time binomial reshuffling chain on the
// compositions of `total` into N parts.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kinex {

inline constexpr std::uint64_t kMaxChainStates = 2'000'000;

// C(total + N - 1, N - 1), saturating at UINT64_MAX.
std::uint64_t composition_count(std::uint32_t N, std::uint32_t total);

// All compositions in lexicographic order, e.g. (0,2), (1,1), (2,0).
class ConfigSpace {
 public:
  ConfigSpace(std::uint32_t N, std::uint32_t total);

  std::uint32_t agents() const noexcept { return N_; }
  std::uint32_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return states_.size() / N_; }

  std::span<const std::uint32_t> state(std::size_t index) const noexcept {
    return {states_.data() + index * N_, N_};
  }
  // Combinatorial rank; the state must sum to total.
  std::size_t index_of(std::span<const std::uint32_t> state) const;

 private:
  std::uint32_t N_, total_;
  std::vector<std::uint32_t> states_;
  // binom_[r][k] = C(r, k) for r <= total + N.
  std::vector<std::vector<std::uint64_t>> binom_;
};

// Row-stochastic sparse matrix (CSR), columns ascending within a row.
struct TransitionMatrix {
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> prob;

  std::size_t rows() const noexcept { return row_start.size() - 1; }
  // P(row -> column), zero when absent.
  double at(std::size_t row, std::size_t column) const;
};

struct Chain {
  ConfigSpace space;
  TransitionMatrix matrix;
};

// P(Y -> Z) = sum over pairs {i,j} mapping Y to Z of 2/(N(N-1)) C(Y_i+Y_j, Z_i) 2^-(Y_i+Y_j).
Chain build_chain(std::uint32_t N, std::uint32_t total);

struct StationaryResult {
  std::vector<double> pi;
  double residual = 0.0;  // || pi P - pi ||_1
  std::size_t iterations = 0;
};

// Power iteration from the uniform vector until the residual drops below `tol`.
StationaryResult stationary(const Chain& chain, double tol = 1e-13, std::size_t max_iterations = 1'000'000);

// Multinomial(total; 1/N, ..., 1/N) weight of the state.
double multinomial_weight(std::span<const std::uint32_t> state, std::uint32_t N, std::uint32_t total);
std::vector<double> multinomial_law(const ConfigSpace& space);

// max over (Y, Z) of |P(Y->Z) mu(Y) - P(Z->Y) mu(Z)| with mu the multinomial law.
double detailed_balance_residual(const Chain& chain);

// Sum of pi over states with X_agent = n.
double marginal(const ConfigSpace& space, std::span<const double> pi, std::size_t agent, std::uint32_t n);

// Binomial(total, 1/N) at n.
double binomial_marginal(std::uint32_t N, std::uint32_t total, std::uint32_t n);

// |Binomial(N mu, 1/N)(n) - Poisson(mu)(n)|; N mu must be an integer.
double poisson_limit_gap(std::uint32_t N, double mu, std::uint32_t n);

}  // namespace kinex

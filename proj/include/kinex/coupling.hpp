#pragma once

// Shared-coin coupling of the nonlinear jump process X and its equilibrium
// copy Xbar, approximated by an interacting ensemble of M pairs whose
// partners (Y, Ybar) are drawn from the ensemble itself.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kinex/metrics.hpp"
#include "kinex/pmf.hpp"
#include "kinex/rng.hpp"

namespace kinex {

class CoupledEnsemble {
 public:
  CoupledEnsemble(std::vector<std::int64_t> x, std::vector<std::int64_t> xbar, double t = 0.0);

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const std::int64_t> x() const noexcept { return x_; }
  std::span<const std::int64_t> xbar() const noexcept { return xbar_; }
  double t() const noexcept { return t_; }

  // D = mean of (x - xbar)^2, maintained exactly.
  double discrepancy() const noexcept { return static_cast<double>(sum_sq_) / static_cast<double>(size()); }

  Pmf x_marginal() const;
  Pmf xbar_marginal() const;

  // Pair i takes the coin sums, partner j the complements; D is updated.
  void exchange(std::size_t i, std::size_t j, Rng& rng);
  void advance(double dt) noexcept { t_ += dt; }

 private:
  std::vector<std::int64_t> x_, xbar_;
  double t_ = 0.0;
  std::int64_t sum_sq_ = 0;
};

// (sum_{k<=s} B_k, sum_{k<=sbar} B_k) over one shared sequence of fair coins.
std::pair<std::int64_t, std::int64_t> shared_coin_sums(std::int64_t s, std::int64_t sbar, Rng& rng);

struct CoupledMove {
  std::size_t pair;
  std::size_t partner;
};

// Uniform pair, distinct uniform partner, shared coins, then time += Exp(mean 2/M).
CoupledMove coupled_step(CoupledEnsemble& ens, Rng& rng);

// x_i = F^-1(u_i), xbar_i = G^-1(u_i) for i.i.d. uniforms u_i, with F the cdf of p0
// and G that of Poisson(lambda).
CoupledEnsemble comonotone_ensemble(const Pmf& p0, double lambda, std::size_t M, Rng& rng);

// 1 / ((1 - sqrt(2/3)) t / 4 + 1).
double coupling_envelope(double t);

// D(t) on {0, grid_step, ..., t_end} for one replica. Requires |mean(p0) - lambda| <= 1e-6.
TraceSeries run_coupling(const Pmf& p0, double lambda, std::size_t M, double t_end, std::uint64_t seed,
                         double grid_step = 0.25, std::uint64_t replica = 0);

struct CouplingSummary {
  std::vector<double> times;
  std::vector<double> d_mean;
  std::vector<double> d_stderr;  // across replicas
  std::vector<double> bound;     // coupling_envelope(t)
  std::vector<TraceSeries> replicas;
};

// Replicas run concurrently on streams (seed, 0), (seed, 1), ...
CouplingSummary run_coupling_replicas(const Pmf& p0, double lambda, std::size_t M, double t_end, std::uint64_t seed,
                                      std::size_t replicas, double grid_step = 0.25);

}  // namespace kinex

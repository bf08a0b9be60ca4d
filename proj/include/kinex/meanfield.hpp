#pragma once

// Collision operator Q[p]_n = P(B o (X+Y) = n) - p_n and fixed-step RK4 for
// dp/dt = Q[p] on a truncated state vector.

#include <cstddef>
#include <span>
#include <vector>

#include "kinex/pmf.hpp"

namespace kinex {

inline constexpr std::size_t kMaxTruncation = 512;

// Q on {0, ..., K} with the thinning kernel tabulated once. Thread safe.
class CollisionOperator {
 public:
  explicit CollisionOperator(std::size_t K);

  std::size_t truncation() const noexcept { return K_; }

  // Writes Q[p] into `out` (both of length K+1) and returns the gain mass beyond K.
  double apply(std::span<const double> p, std::span<double> out) const;

 private:
  std::size_t K_;
  // (K+1) x (2K+1), row n holds C(m,n) 2^-m for m = 0..2K.
  std::vector<double> kernel_;
  // tail_weight_[m] = P(Binomial(m, 1/2) > K).
  std::vector<double> tail_weight_;
};

SignedVector q_operator(const Pmf& p);

struct OdeConfig {
  std::size_t K = 60;
  double dt = 0.01;
  double t_end = 1.0;
  // Ascending, inside [0, t_end]. Empty means every grid point.
  std::vector<double> snapshot_times;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Pmf> states;
  // |1 - sum p_n| per snapshot.
  std::vector<double> mass_defect;

  std::size_t size() const noexcept { return times.size(); }
};

// Classical RK4 with step dt (last step shortened to land on t_end). Snapshots
// between grid points are linear interpolations of the neighbouring states.
// Throws a truncation error if any snapshot loses more than 1e-6 of mass.
Trajectory integrate(const Pmf& p0, const OdeConfig& cfg);

// {0, step, 2 step, ..., t_end}; t_end is always included.
std::vector<double> uniform_grid(double t_end, double step);

// mu^2 + mu + (m2_0 - mu^2 - mu) e^{-t/2}.
double second_moment_forecast(double mu, double m2_0, double t);

// sup_{n <= K/2} |Q[poisson(lambda, K)]_n|.
double equilibrium_residual(double lambda, std::size_t K);

// Smallest K with Poisson(lambda) mass beyond K below 1e-30. Size error above kMaxTruncation.
std::size_t default_truncation(double lambda);

}  // namespace kinex

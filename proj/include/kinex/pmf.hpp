#pragma once

// Probability mass functions on {0, ..., K} and the binomial-thinning
// collision kernel.

#include <cstddef>
#include <span>
#include <vector>

namespace kinex {

// Dense pmf over {0, ..., K}. `trunc_defect` is mass known to lie beyond K.
// It is carried for diagnostics and never folded back into the weights.
class Pmf {
 public:
  explicit Pmf(std::vector<double> weights, double trunc_defect = 0.0);

  static Pmf dirac(std::size_t k);

  std::size_t max_index() const noexcept { return weights_.size() - 1; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double trunc_defect() const noexcept { return trunc_defect_; }

  // Zero beyond K.
  double operator[](std::size_t n) const noexcept { return n < weights_.size() ? weights_[n] : 0.0; }

  // Sum of weights in ascending index order (excludes trunc_defect).
  double total() const noexcept;

  // |total + trunc_defect - 1| <= tol.
  bool normalized(double tol = 1e-9) const noexcept;

  // Re-truncate to {0, ..., K}: cut mass moves to trunc_defect, a shorter pmf is zero padded.
  Pmf truncated(std::size_t K) const;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> weights_;
  double trunc_defect_ = 0.0;
};

// Differences of pmfs or rates of change; entries may be negative.
struct SignedVector {
  std::vector<double> entries;
  // Mass the operation pushed beyond the last index.
  double leakage = 0.0;

  double sum() const noexcept;
};

Pmf poisson_pmf(double lambda, std::size_t K);
Pmf binomial_pmf(std::size_t n, double gamma);

// C(m, n) 2^-m for 0 <= n <= m <= max_m, from log-factorials.
class ThinningKernel {
 public:
  explicit ThinningKernel(std::size_t max_m);

  std::size_t max_m() const noexcept { return log_factorial_.size() - 1; }
  double operator()(std::size_t m, std::size_t n) const noexcept;

 private:
  std::vector<double> log_factorial_;
};

// Law of B o (X + Y) for independent X ~ p, Y ~ q, truncated at K_p + K_q.
Pmf collision_gain(const Pmf& p, const Pmf& q);

// Ordinary convolution of weight vectors.
std::vector<double> convolve(std::span<const double> p, std::span<const double> q);

double mean(const Pmf& p) noexcept;
double second_moment(const Pmf& p) noexcept;
double variance(const Pmf& p) noexcept;

std::vector<double> cdf(const Pmf& p);

// min{k : F(k) >= z} for z in (0, 1]. Returns K when a deficient tail keeps F(K) < z.
std::size_t quantile(const Pmf& p, double z);

}  // namespace kinex

#pragma once

// Distances between pmfs, the Gini index, and decay-rate fits.

#include <span>
#include <string>
#include <vector>

#include "kinex/pmf.hpp"

namespace kinex {

struct TraceSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;

  std::size_t size() const noexcept { return times.size(); }
  // Equal lengths and strictly increasing times.
  void validate() const;
};

// (int_0^1 |F^-1(z) - G^-1(z)|^order dz)^(1/order), order 1 or 2, integrated
// exactly over the pieces on which both quantile functions are constant.
// Inputs whose trunc_defect exceeds 1e-6 raise an unreliable-tail error.
double wasserstein(const Pmf& p, const Pmf& q, int order);

double total_variation(const Pmf& p, const Pmf& q);

// Mean absolute difference over twice the mean.
double gini(std::span<const double> values);
double gini(const Pmf& p);

struct DecayFit {
  double exp_rate = 0.0;       // slope of log v against t
  double exp_r2 = 0.0;
  double poly_exponent = 0.0;  // slope of log v against log t
  double poly_r2 = 0.0;
  std::size_t points = 0;
};

// Least-squares fits on the points with t in [t_start, t_end]. Needs at least
// ten points, all values positive, and t_start > 0 for the power-law fit.
DecayFit fit_decay(const TraceSeries& series, double t_start, double t_end);

}  // namespace kinex

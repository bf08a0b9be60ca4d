#include "kinex/pmf.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kinex/error.hpp"

namespace kinex {

Pmf::Pmf(std::vector<double> weights, double trunc_defect)
    : weights_(std::move(weights)), trunc_defect_(trunc_defect) {
  if (weights_.empty()) fail(ErrorKind::parameter, "pmf needs at least one weight");
  for (std::size_t n = 0; n < weights_.size(); ++n) {
    if (!(weights_[n] >= 0.0) || !std::isfinite(weights_[n]))
      fail(ErrorKind::parameter, "pmf weight " + std::to_string(n) + " is negative or not finite");
  }
  if (!(trunc_defect_ >= 0.0) || !std::isfinite(trunc_defect_))
    fail(ErrorKind::parameter, "trunc_defect must be a finite nonnegative number");
}

Pmf Pmf::dirac(std::size_t k) {
  std::vector<double> w(k + 1, 0.0);
  w[k] = 1.0;
  return Pmf(std::move(w));
}

double Pmf::total() const noexcept {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

bool Pmf::normalized(double tol) const noexcept { return std::abs(total() + trunc_defect_ - 1.0) <= tol; }

Pmf Pmf::truncated(std::size_t K) const {
  std::vector<double> w(K + 1, 0.0);
  double cut = 0.0;
  for (std::size_t n = 0; n < weights_.size(); ++n) {
    if (n <= K)
      w[n] = weights_[n];
    else
      cut += weights_[n];
  }
  return Pmf(std::move(w), trunc_defect_ + cut);
}

double SignedVector::sum() const noexcept {
  double s = 0.0;
  for (double e : entries) s += e;
  return s;
}

Pmf poisson_pmf(double lambda, std::size_t K) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorKind::parameter, "poisson rate must be positive, got " + std::to_string(lambda));
  const double log_lambda = std::log(lambda);
  auto term = [&](std::size_t k) {
    const double kd = static_cast<double>(k);
    return std::exp(kd * log_lambda - lambda - std::lgamma(kd + 1.0));
  };
  std::vector<double> w(K + 1);
  for (std::size_t k = 0; k <= K; ++k) w[k] = term(k);

  // Tail summed directly so tiny defects keep their relative precision.
  double tail = 0.0;
  for (std::size_t k = K + 1;; ++k) {
    const double t = term(k);
    tail += t;
    if (static_cast<double>(k) > lambda && (t == 0.0 || t < tail * 1e-18)) break;
  }
  return Pmf(std::move(w), tail);
}

Pmf binomial_pmf(std::size_t n, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    fail(ErrorKind::parameter, "binomial success probability must lie in [0,1], got " + std::to_string(gamma));
  std::vector<double> w(n + 1, 0.0);
  if (gamma == 0.0) {
    w[0] = 1.0;
  } else if (gamma == 1.0) {
    w[n] = 1.0;
  } else {
    const double nd = static_cast<double>(n);
    const double lg = std::log(gamma);
    const double lq = std::log1p(-gamma);
    const double lfn = std::lgamma(nd + 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      w[k] = std::exp(lfn - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * lg + (nd - kd) * lq);
    }
  }
  return Pmf(std::move(w));
}

ThinningKernel::ThinningKernel(std::size_t max_m) : log_factorial_(max_m + 1) {
  for (std::size_t k = 0; k <= max_m; ++k) log_factorial_[k] = std::lgamma(static_cast<double>(k) + 1.0);
}

double ThinningKernel::operator()(std::size_t m, std::size_t n) const noexcept {
  if (n > m) return 0.0;
  // C(0,0) = 1: the empty coin sum is 0 with probability one.
  return std::exp(log_factorial_[m] - log_factorial_[n] - log_factorial_[m - n] -
                  static_cast<double>(m) * std::numbers::ln2);
}

std::vector<double> convolve(std::span<const double> p, std::span<const double> q) {
  std::vector<double> c(p.size() + q.size() - 1, 0.0);
  for (std::size_t m = 0; m < c.size(); ++m) {
    const std::size_t k_lo = m >= q.size() ? m - q.size() + 1 : 0;
    const std::size_t k_hi = std::min(m, p.size() - 1);
    double s = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) s += p[k] * q[m - k];
    c[m] = s;
  }
  return c;
}

Pmf collision_gain(const Pmf& p, const Pmf& q) {
  // Convolve, then thin: P(Z = n) = sum_{m >= n} C(m,n) 2^-m P(X + Y = m).
  const std::vector<double> c = convolve(p.weights(), q.weights());
  const std::size_t max_m = c.size() - 1;
  const ThinningKernel kernel(max_m);
  std::vector<double> out(max_m + 1, 0.0);
  for (std::size_t n = 0; n <= max_m; ++n) {
    double s = 0.0;
    for (std::size_t m = n; m <= max_m; ++m) s += kernel(m, n) * c[m];
    out[n] = s;
  }
  // A pair is unrepresented when either factor lies beyond its truncation.
  const double dp = p.trunc_defect(), dq = q.trunc_defect();
  return Pmf(std::move(out), dp + dq - dp * dq);
}

double mean(const Pmf& p) noexcept {
  double s = 0.0;
  const auto w = p.weights();
  for (std::size_t n = 0; n < w.size(); ++n) s += static_cast<double>(n) * w[n];
  return s;
}

double second_moment(const Pmf& p) noexcept {
  double s = 0.0;
  const auto w = p.weights();
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double nd = static_cast<double>(n);
    s += nd * nd * w[n];
  }
  return s;
}

double variance(const Pmf& p) noexcept {
  const double m = mean(p);
  return second_moment(p) - m * m;
}

std::vector<double> cdf(const Pmf& p) {
  std::vector<double> F(p.size());
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    s += p[n];
    F[n] = s;
  }
  return F;
}

std::size_t quantile(const Pmf& p, double z) {
  if (!(z > 0.0 && z <= 1.0)) fail(ErrorKind::parameter, "quantile level must lie in (0,1], got " + std::to_string(z));
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    s += p[n];
    if (s >= z) return n;
  }
  return p.max_index();
}

}  // namespace kinex

#include "kinex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kinex/error.hpp"

namespace kinex {

namespace {

constexpr double kTailLimit = 1e-6;

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit f;
  f.slope = sxy / sxx;
  const double intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

}  // namespace

void TraceSeries::validate() const {
  if (times.size() != values.size())
    fail(ErrorKind::parameter, "trace '" + label + "' has mismatched time and value lengths");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) fail(ErrorKind::parameter, "trace '" + label + "' times must strictly increase");
}

double wasserstein(const Pmf& p, const Pmf& q, int order) {
  if (order != 1 && order != 2) fail(ErrorKind::parameter, "wasserstein order must be 1 or 2");
  if (p.trunc_defect() > kTailLimit || q.trunc_defect() > kTailLimit)
    fail(ErrorKind::unreliable_tail, "trunc_defect above 1e-6; the quantile tail is not resolved");

  const auto wp = p.weights(), wq = q.weights();
  const std::size_t kp = p.max_index(), kq = q.max_index();
  std::size_t i = 0, j = 0;
  double Fi = wp[0], Gj = wq[0];
  double z = 0.0, acc = 0.0;
  // On (z, next) both quantiles are constant: F^-1 = i and G^-1 = j.
  while (z < 1.0) {
    while (i < kp && Fi <= z) Fi += wp[++i];
    while (j < kq && Gj <= z) Gj += wq[++j];
    const double fi = i == kp ? 1.0 : std::min(Fi, 1.0);
    const double gj = j == kq ? 1.0 : std::min(Gj, 1.0);
    const double next = std::min(fi, gj);
    const double gap = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
    acc += (next - z) * (order == 1 ? gap : gap * gap);
    z = next;
  }
  return order == 1 ? acc : std::sqrt(acc);
}

double total_variation(const Pmf& p, const Pmf& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

double gini(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::undefined, "gini of an empty population");
  std::vector<double> x(values.begin(), values.end());
  for (double v : x)
    if (!(v >= 0.0)) fail(ErrorKind::parameter, "gini needs nonnegative values");
  std::sort(x.begin(), x.end());
  double total = 0.0;
  for (double v : x) total += v;
  if (!(total > 0.0)) fail(ErrorKind::undefined, "gini undefined for zero mean");
  // sum_k k (n - k) (x_(k+1) - x_(k)) / (n sum x): every term is nonnegative.
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double kd = static_cast<double>(k);
    acc += kd * static_cast<double>(n - k) * (x[k] - x[k - 1]);
  }
  return acc / (static_cast<double>(n) * total);
}

double gini(const Pmf& p) {
  const double total = p.total();
  const double mu = mean(p) / total;
  if (!(mu > 0.0)) fail(ErrorKind::undefined, "gini undefined for zero mean");
  // E|X - Y| = 2 sum_k F(k) (1 - F(k)) on the integers.
  const auto w = p.weights();
  double below = 0.0, acc = 0.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    below += w[k];
    const double F = below / total;
    acc += F * (1.0 - F);
  }
  return acc / mu;
}

DecayFit fit_decay(const TraceSeries& series, double t_start, double t_end) {
  series.validate();
  std::vector<double> t, logt, logv;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ti = series.times[i];
    if (ti < t_start || ti > t_end) continue;
    const double v = series.values[i];
    if (!(v > 0.0))
      fail(ErrorKind::log_domain, "nonpositive value " + std::to_string(v) + " at t=" + std::to_string(ti));
    if (!(ti > 0.0)) fail(ErrorKind::log_domain, "power-law fit needs t > 0 inside the window");
    t.push_back(ti);
    logt.push_back(std::log(ti));
    logv.push_back(std::log(v));
  }
  if (t.size() < 10)
    fail(ErrorKind::parameter, "decay fit needs at least 10 points in the window, got " + std::to_string(t.size()));
  DecayFit out;
  const LineFit e = least_squares(t, logv);
  const LineFit pl = least_squares(logt, logv);
  out.exp_rate = e.slope;
  out.exp_r2 = e.r2;
  out.poly_exponent = pl.slope;
  out.poly_r2 = pl.r2;
  out.points = t.size();
  return out;
}

}  // namespace kinex

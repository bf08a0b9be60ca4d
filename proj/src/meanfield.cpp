#include "kinex/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kinex/error.hpp"

namespace kinex {

namespace {

constexpr double kMassDefectLimit = 1e-6;
constexpr double kTailTarget = 1e-30;

std::size_t checked_truncation(std::size_t K) {
  if (K > kMaxTruncation)
    fail(ErrorKind::size, "truncation K=" + std::to_string(K) + " exceeds the cap " + std::to_string(kMaxTruncation));
  return K;
}

}  // namespace

CollisionOperator::CollisionOperator(std::size_t K)
    : K_(checked_truncation(K)), kernel_((K + 1) * (2 * K + 1), 0.0), tail_weight_(2 * K + 1, 0.0) {
  const std::size_t width = 2 * K + 1;
  // Pascal rows halved as they are built.
  std::vector<double> row{1.0}, next;
  for (std::size_t m = 0; m < width; ++m) {
    if (m > 0) {
      next.assign(m + 1, 0.0);
      for (std::size_t n = 0; n <= m; ++n) next[n] = 0.5 * ((n > 0 ? row[n - 1] : 0.0) + (n < m ? row[n] : 0.0));
      row.swap(next);
    }
    for (std::size_t n = 0; n <= std::min(m, K); ++n) kernel_[n * width + m] = row[n];
    double tail = 0.0;
    for (std::size_t n = K + 1; n <= m; ++n) tail += row[n];
    tail_weight_[m] = tail;
  }
}

double CollisionOperator::apply(std::span<const double> p, std::span<double> out) const {
  const std::size_t width = 2 * K_ + 1;
  const std::vector<double> c = convolve(p, p);
  for (std::size_t n = 0; n <= K_; ++n) {
    const double* row = &kernel_[n * width];
    double gain = 0.0;
    for (std::size_t m = n; m < width; ++m) gain += row[m] * c[m];
    out[n] = gain - p[n];
  }
  // Gain mass landing on n > K; only sums m > K contribute.
  double leakage = 0.0;
  for (std::size_t m = K_ + 1; m < width; ++m) leakage += c[m] * tail_weight_[m];
  return leakage;
}

SignedVector q_operator(const Pmf& p) {
  const CollisionOperator op(p.max_index());
  SignedVector q;
  q.entries.assign(p.size(), 0.0);
  q.leakage = op.apply(p.weights(), q.entries);
  return q;
}

void OdeConfig::validate() const {
  if (!(dt > 0.0 && dt <= 0.1)) fail(ErrorKind::configuration, "dt must lie in (0, 0.1], got " + std::to_string(dt));
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    fail(ErrorKind::configuration, "t_end must be finite and nonnegative");
  checked_truncation(K);
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    const double s = snapshot_times[i];
    if (s < 0.0 || s > t_end * (1 + 1e-12) + 1e-12)
      fail(ErrorKind::configuration, "snapshot time " + std::to_string(s) + " outside [0, t_end]");
    if (i > 0 && !(s > snapshot_times[i - 1]))
      fail(ErrorKind::configuration, "snapshot times must be strictly increasing");
  }
}

std::vector<double> uniform_grid(double t_end, double step) {
  if (!(step > 0.0)) fail(ErrorKind::parameter, "grid step must be positive");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor(t_end / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) g.push_back(static_cast<double>(k) * step);
  if (t_end - g.back() > 1e-9 * std::max(1.0, t_end)) g.push_back(t_end);
  return g;
}

namespace {

Pmf snapshot_pmf(const std::vector<double>& w, double t) {
  std::vector<double> clean(w);
  for (std::size_t n = 0; n < clean.size(); ++n) {
    if (clean[n] < 0.0) {
      if (clean[n] < -1e-13)
        fail(ErrorKind::numerical, "negative mass " + std::to_string(clean[n]) + " at n=" + std::to_string(n) +
                                       ", t=" + std::to_string(t));
      clean[n] = 0.0;
    }
  }
  double s = 0.0;
  for (double x : clean) s += x;
  return Pmf(std::move(clean), std::max(0.0, 1.0 - s));
}

}  // namespace

Trajectory integrate(const Pmf& p0, const OdeConfig& cfg) {
  cfg.validate();
  const std::size_t K = cfg.K;
  if (p0.max_index() > K) {
    for (std::size_t n = K + 1; n < p0.size(); ++n)
      if (p0[n] > 0.0)
        fail(ErrorKind::configuration,
             "initial pmf has mass at n=" + std::to_string(n) + " beyond K=" + std::to_string(K));
  }
  const CollisionOperator op(K);
  const std::size_t dim = K + 1;

  std::vector<double> grid = uniform_grid(cfg.t_end, cfg.dt);
  const std::vector<double> snaps = cfg.snapshot_times.empty() ? grid : cfg.snapshot_times;
  const double eps = 1e-9 * std::max(1.0, cfg.t_end);

  Trajectory traj;
  auto record = [&](double t, const std::vector<double>& state) {
    Pmf p = snapshot_pmf(state, t);
    const double defect = std::abs(1.0 - p.total());
    if (defect > kMassDefectLimit)
      fail(ErrorKind::truncation, "mass defect " + std::to_string(defect) + " exceeds 1e-6 first at t=" +
                                      std::to_string(t) + " (K=" + std::to_string(K) + " too small)");
    traj.times.push_back(t);
    traj.states.push_back(std::move(p));
    traj.mass_defect.push_back(defect);
  };

  std::vector<double> cur(dim, 0.0), next(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), mix(dim);
  for (std::size_t n = 0; n < std::min(dim, p0.size()); ++n) cur[n] = p0[n];

  std::size_t s = 0;
  while (s < snaps.size() && snaps[s] <= eps) record(snaps[s++], cur);

  for (std::size_t k = 1; k < grid.size() && s < snaps.size(); ++k) {
    const double ta = grid[k - 1], tb = grid[k];
    const double h = tb - ta;
    op.apply(cur, k1);
    for (std::size_t n = 0; n < dim; ++n) tmp[n] = cur[n] + 0.5 * h * k1[n];
    op.apply(tmp, k2);
    for (std::size_t n = 0; n < dim; ++n) tmp[n] = cur[n] + 0.5 * h * k2[n];
    op.apply(tmp, k3);
    for (std::size_t n = 0; n < dim; ++n) tmp[n] = cur[n] + h * k3[n];
    op.apply(tmp, k4);
    for (std::size_t n = 0; n < dim; ++n) next[n] = cur[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);

    while (s < snaps.size() && snaps[s] <= tb + eps) {
      const double ts = snaps[s];
      if (std::abs(ts - tb) <= eps) {
        record(ts, next);
      } else {
        const double theta = (ts - ta) / h;
        for (std::size_t n = 0; n < dim; ++n) mix[n] = (1.0 - theta) * cur[n] + theta * next[n];
        record(ts, mix);
      }
      ++s;
    }
    cur.swap(next);
  }
  return traj;
}

double second_moment_forecast(double mu, double m2_0, double t) {
  const double limit = mu * mu + mu;
  return limit + (m2_0 - limit) * std::exp(-t / 2.0);
}

double equilibrium_residual(double lambda, std::size_t K) {
  const SignedVector q = q_operator(poisson_pmf(lambda, K));
  double sup = 0.0;
  for (std::size_t n = 0; n <= K / 2; ++n) sup = std::max(sup, std::abs(q.entries[n]));
  return sup;
}

std::size_t default_truncation(double lambda) {
  const Pmf p = poisson_pmf(lambda, kMaxTruncation);
  // tail[K] = mass beyond K, accumulated from the far end.
  double tail = p.trunc_defect();
  if (tail >= kTailTarget)
    fail(ErrorKind::size, "Poisson(" + std::to_string(lambda) + ") needs K beyond the cap " +
                              std::to_string(kMaxTruncation));
  std::size_t K = kMaxTruncation;
  while (K > 0 && tail + p[K] < kTailTarget) {
    tail += p[K];
    --K;
  }
  return K;
}

}  // namespace kinex

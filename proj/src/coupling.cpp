#include "kinex/coupling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "kinex/error.hpp"
#include "kinex/meanfield.hpp"
#include "kinex/parallel.hpp"

namespace kinex {

namespace {

std::int64_t square(std::int64_t v) { return v * v; }

Pmf histogram(std::span<const std::int64_t> v) {
  const std::int64_t hi = *std::max_element(v.begin(), v.end());
  std::vector<double> w(static_cast<std::size_t>(hi) + 1, 0.0);
  for (std::int64_t x : v) w[static_cast<std::size_t>(x)] += 1.0;
  for (double& c : w) c /= static_cast<double>(v.size());
  return Pmf(std::move(w));
}

}  // namespace

CoupledEnsemble::CoupledEnsemble(std::vector<std::int64_t> x, std::vector<std::int64_t> xbar, double t)
    : x_(std::move(x)), xbar_(std::move(xbar)), t_(t) {
  if (x_.size() != xbar_.size()) fail(ErrorKind::parameter, "coupled marginals must have equal size");
  if (x_.size() < 2) fail(ErrorKind::parameter, "coupled ensemble needs M >= 2");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (x_[k] < 0 || xbar_[k] < 0) fail(ErrorKind::parameter, "coupled wealth must be nonnegative");
    sum_sq_ += square(x_[k] - xbar_[k]);
  }
}

Pmf CoupledEnsemble::x_marginal() const { return histogram(x_); }
Pmf CoupledEnsemble::xbar_marginal() const { return histogram(xbar_); }

std::pair<std::int64_t, std::int64_t> shared_coin_sums(std::int64_t s, std::int64_t sbar, Rng& rng) {
  const std::int64_t lo = std::min(s, sbar), hi = std::max(s, sbar);
  std::int64_t sum_lo = 0, sum_hi = 0, used = 0;
  while (used < hi) {
    const std::int64_t take = std::min<std::int64_t>(64, hi - used);
    // The first `take` coins are the top bits of the word.
    const std::uint64_t bits = rng() >> (64 - take);
    if (used < lo) {
      const std::int64_t part = std::min(take, lo - used);
      sum_lo += std::popcount(bits >> (take - part));
    }
    sum_hi += std::popcount(bits);
    used += take;
  }
  return s <= sbar ? std::pair{sum_lo, sum_hi} : std::pair{sum_hi, sum_lo};
}

void CoupledEnsemble::exchange(std::size_t i, std::size_t j, Rng& rng) {
  sum_sq_ -= square(x_[i] - xbar_[i]) + square(x_[j] - xbar_[j]);
  const std::int64_t s = x_[i] + x_[j];
  const std::int64_t sbar = xbar_[i] + xbar_[j];
  const auto [b, bbar] = shared_coin_sums(s, sbar, rng);
  x_[i] = b;
  x_[j] = s - b;
  xbar_[i] = bbar;
  xbar_[j] = sbar - bbar;
  sum_sq_ += square(x_[i] - xbar_[i]) + square(x_[j] - xbar_[j]);
}

CoupledMove coupled_step(CoupledEnsemble& ens, Rng& rng) {
  const double dt = exponential(rng, 2.0 / static_cast<double>(ens.size()));
  const auto [i, j] = uniform_pair(rng, ens.size());
  ens.exchange(i, j, rng);
  ens.advance(dt);
  return {i, j};
}

CoupledEnsemble comonotone_ensemble(const Pmf& p0, double lambda, std::size_t M, Rng& rng) {
  if (M < 2) fail(ErrorKind::parameter, "coupled ensemble needs M >= 2");
  if (!(lambda > 0.0)) fail(ErrorKind::parameter, "lambda must be positive");
  const std::vector<double> F = cdf(p0);
  const std::vector<double> G = cdf(poisson_pmf(lambda, default_truncation(lambda)));
  // One uniform per pair drives both quantile functions.
  auto invert = [](const std::vector<double>& cum, double u) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return static_cast<std::int64_t>(std::min<std::size_t>(it - cum.begin(), cum.size() - 1));
  };
  std::vector<std::int64_t> x(M), xbar(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double u = uniform01(rng);
    x[k] = invert(F, u);
    xbar[k] = invert(G, u);
  }
  return CoupledEnsemble(std::move(x), std::move(xbar));
}

double coupling_envelope(double t) { return 1.0 / ((1.0 - std::sqrt(2.0 / 3.0)) * t / 4.0 + 1.0); }

TraceSeries run_coupling(const Pmf& p0, double lambda, std::size_t M, double t_end, std::uint64_t seed,
                         double grid_step, std::uint64_t replica) {
  const double m0 = mean(p0);
  if (std::abs(m0 - lambda) > 1e-6)
    fail(ErrorKind::precondition, "coupling needs mean(p0) = lambda; got mean " + std::to_string(m0) +
                                      " vs lambda " + std::to_string(lambda));
  Rng rng = make_rng(seed, replica);
  CoupledEnsemble ens = comonotone_ensemble(p0, lambda, M, rng);
  const std::vector<double> grid = uniform_grid(t_end, grid_step);

  TraceSeries trace;
  trace.label = "D";
  trace.times = grid;
  trace.values.reserve(grid.size());
  std::size_t g = 0;
  while (g < grid.size()) {
    // The state before an event holds on [t_old, t_new).
    const double before = ens.discrepancy();
    coupled_step(ens, rng);
    while (g < grid.size() && grid[g] < ens.t()) {
      trace.values.push_back(before);
      ++g;
    }
  }
  return trace;
}

CouplingSummary run_coupling_replicas(const Pmf& p0, double lambda, std::size_t M, double t_end, std::uint64_t seed,
                                      std::size_t replicas, double grid_step) {
  if (replicas < 1) fail(ErrorKind::parameter, "need at least one replica");
  CouplingSummary out;
  out.replicas.resize(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    out.replicas[r] = run_coupling(p0, lambda, M, t_end, seed, grid_step, r);
  });
  out.times = out.replicas.front().times;
  const std::size_t n = out.times.size();
  const double R = static_cast<double>(replicas);
  out.d_mean.assign(n, 0.0);
  out.d_stderr.assign(n, 0.0);
  out.bound.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (const auto& rep : out.replicas) s += rep.values[k];
    const double m = s / R;
    double ss = 0.0;
    for (const auto& rep : out.replicas) ss += (rep.values[k] - m) * (rep.values[k] - m);
    out.d_mean[k] = m;
    out.d_stderr[k] = replicas > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    out.bound[k] = coupling_envelope(out.times[k]);
  }
  return out;
}

}  // namespace kinex

#include "kinex/exact_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "kinex/error.hpp"
#include "kinex/pmf.hpp"

namespace kinex {

namespace {

// half_binom[s][z] = C(s, z) 2^-s via Pascal's rule with halving.
std::vector<std::vector<double>> halved_binomials(std::uint32_t max_s) {
  std::vector<std::vector<double>> h(max_s + 1);
  h[0] = {1.0};
  for (std::uint32_t s = 1; s <= max_s; ++s) {
    h[s].assign(s + 1, 0.0);
    for (std::uint32_t z = 0; z <= s; ++z) {
      const double left = z > 0 ? h[s - 1][z - 1] : 0.0;
      const double right = z < s ? h[s - 1][z] : 0.0;
      h[s][z] = 0.5 * (left + right);
    }
  }
  return h;
}

}  // namespace

std::uint64_t composition_count(std::uint32_t N, std::uint32_t total) {
  if (N == 0) return 0;
  // C(total + k, k) = C(total + k - 1, k - 1) (total + k) / k stays integral.
  unsigned __int128 r = 1;
  for (std::uint32_t k = 1; k < N; ++k) {
    r = r * (total + k) / k;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

ConfigSpace::ConfigSpace(std::uint32_t N, std::uint32_t total) : N_(N), total_(total) {
  if (N < 2) fail(ErrorKind::parameter, "chain needs N >= 2 agents");
  const std::uint64_t count = composition_count(N, total);
  if (count > kMaxChainStates)
    fail(ErrorKind::size, "state space has " + std::to_string(count) + " configurations, above the " +
                              std::to_string(kMaxChainStates) + " limit");

  binom_.resize(total + N + 1);
  for (std::size_t r = 0; r < binom_.size(); ++r) {
    binom_[r].assign(r + 1, 1);
    for (std::size_t k = 1; k < r; ++k) binom_[r][k] = binom_[r - 1][k - 1] + binom_[r - 1][k];
  }

  states_.reserve(count * N);
  std::vector<std::uint32_t> v(N, 0);
  v[N - 1] = total;
  while (true) {
    states_.insert(states_.end(), v.begin(), v.end());
    // Lexicographic successor: bump the entry just left of the last nonzero one.
    std::size_t last = N - 1;
    while (last > 0 && v[last] == 0) --last;
    if (last == 0) break;
    const std::uint32_t carry = v[last] - 1;
    ++v[last - 1];
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(last), v.end(), 0u);
    v[N - 1] = carry;
  }
}

std::size_t ConfigSpace::index_of(std::span<const std::uint32_t> state) const {
  if (state.size() != N_) fail(ErrorKind::parameter, "state has the wrong number of agents");
  std::uint64_t rank = 0;
  std::uint32_t remaining = total_;
  for (std::size_t i = 0; i + 1 < N_; ++i) {
    const std::size_t parts_after = N_ - i - 1;
    if (state[i] > remaining) fail(ErrorKind::parameter, "state does not sum to the configured total");
    // States sharing the prefix with a smaller entry at i come first.
    for (std::uint32_t u = 0; u < state[i]; ++u) {
      const std::uint32_t rest = remaining - u;
      rank += binom_[rest + parts_after - 1][parts_after - 1];
    }
    remaining -= state[i];
  }
  if (state[N_ - 1] != remaining) fail(ErrorKind::parameter, "state does not sum to the configured total");
  return static_cast<std::size_t>(rank);
}

double TransitionMatrix::at(std::size_t row, std::size_t column) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_start[row]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_start[row + 1]);
  const auto it = std::lower_bound(first, last, column);
  if (it == last || *it != column) return 0.0;
  return prob[static_cast<std::size_t>(it - col.begin())];
}

Chain build_chain(std::uint32_t N, std::uint32_t total) {
  ConfigSpace space(N, total);
  const auto half = halved_binomials(total);
  const double pair_weight = 2.0 / (static_cast<double>(N) * static_cast<double>(N - 1));

  TransitionMatrix m;
  m.row_start.reserve(space.size() + 1);
  m.row_start.push_back(0);
  std::vector<std::pair<std::size_t, double>> row;
  std::vector<std::uint32_t> z(N);
  for (std::size_t r = 0; r < space.size(); ++r) {
    const auto y = space.state(r);
    row.clear();
    for (std::uint32_t i = 0; i < N; ++i) {
      for (std::uint32_t j = i + 1; j < N; ++j) {
        const std::uint32_t s = y[i] + y[j];
        std::copy(y.begin(), y.end(), z.begin());
        for (std::uint32_t zi = 0; zi <= s; ++zi) {
          z[i] = zi;
          z[j] = s - zi;
          row.emplace_back(space.index_of(z), pair_weight * half[s][zi]);
        }
      }
    }
    std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size();) {
      const std::size_t c = row[k].first;
      double p = 0.0;
      for (; k < row.size() && row[k].first == c; ++k) p += row[k].second;
      m.col.push_back(c);
      m.prob.push_back(p);
    }
    m.row_start.push_back(m.col.size());
  }
  return Chain{std::move(space), std::move(m)};
}

StationaryResult stationary(const Chain& chain, double tol, std::size_t max_iterations) {
  const TransitionMatrix& P = chain.matrix;
  const std::size_t n = P.rows();
  StationaryResult res;
  res.pi.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double w = res.pi[r];
      for (std::size_t e = P.row_start[r]; e < P.row_start[r + 1]; ++e) next[P.col[e]] += w * P.prob[e];
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) diff += std::abs(next[k] - res.pi[k]);
    res.pi.swap(next);
    res.residual = diff;
    res.iterations = it;
    if (diff < tol) return res;
  }
  fail(ErrorKind::numerical, "power iteration did not reach residual " + std::to_string(tol) + " after " +
                                 std::to_string(max_iterations) + " iterations (last " +
                                 std::to_string(res.residual) + ")");
}

double multinomial_weight(std::span<const std::uint32_t> state, std::uint32_t N, std::uint32_t total) {
  if (state.size() != N) fail(ErrorKind::parameter, "state has the wrong number of agents");
  double log_w = std::lgamma(static_cast<double>(total) + 1.0) - static_cast<double>(total) * std::log(static_cast<double>(N));
  std::uint64_t sum = 0;
  for (std::uint32_t x : state) {
    log_w -= std::lgamma(static_cast<double>(x) + 1.0);
    sum += x;
  }
  if (sum != total) fail(ErrorKind::parameter, "state does not sum to the configured total");
  return std::exp(log_w);
}

std::vector<double> multinomial_law(const ConfigSpace& space) {
  std::vector<double> mu(space.size());
  for (std::size_t k = 0; k < space.size(); ++k)
    mu[k] = multinomial_weight(space.state(k), space.agents(), space.total());
  return mu;
}

double detailed_balance_residual(const Chain& chain) {
  const std::vector<double> mu = multinomial_law(chain.space);
  const TransitionMatrix& P = chain.matrix;
  double worst = 0.0;
  for (std::size_t r = 0; r < P.rows(); ++r) {
    for (std::size_t e = P.row_start[r]; e < P.row_start[r + 1]; ++e) {
      const std::size_t c = P.col[e];
      worst = std::max(worst, std::abs(P.prob[e] * mu[r] - P.at(c, r) * mu[c]));
    }
  }
  return worst;
}

double marginal(const ConfigSpace& space, std::span<const double> pi, std::size_t agent, std::uint32_t n) {
  if (agent >= space.agents()) fail(ErrorKind::parameter, "agent index out of range");
  if (pi.size() != space.size()) fail(ErrorKind::parameter, "stationary vector does not match the state space");
  double s = 0.0;
  for (std::size_t k = 0; k < space.size(); ++k)
    if (space.state(k)[agent] == n) s += pi[k];
  return s;
}

double binomial_marginal(std::uint32_t N, std::uint32_t total, std::uint32_t n) {
  return binomial_pmf(total, 1.0 / static_cast<double>(N))[n];
}

double poisson_limit_gap(std::uint32_t N, double mu, std::uint32_t n) {
  if (N < 1 || !(mu > 0.0)) fail(ErrorKind::parameter, "poisson_limit_gap needs N >= 1 and mu > 0");
  const double t = static_cast<double>(N) * mu;
  const double rounded = std::round(t);
  if (std::abs(t - rounded) > 1e-9) fail(ErrorKind::parameter, "N * mu must be an integer total wealth");
  const double b = binomial_marginal(N, static_cast<std::uint32_t>(rounded), n);
  const double p = poisson_pmf(mu, n)[n];
  return std::abs(b - p);
}

}  // namespace kinex

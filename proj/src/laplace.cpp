#include "kinex/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kinex/error.hpp"

namespace kinex {

namespace {

constexpr double kCubeTol = 1e-12;

void check_cube(std::span<const double> a, double t) {
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (!(a[n] >= -kCubeTol && a[n] <= 1.0 + kCubeTol))
      fail(ErrorKind::numerical, "a-system left [0,1] at index " + std::to_string(n) + " (a = " +
                                     std::to_string(a[n]) + ", t = " + std::to_string(t) + ")");
  }
}

void a_rhs(std::span<const double> a, double closure, std::span<double> out) {
  const std::size_t M = a.size() - 1;
  for (std::size_t n = 0; n < M; ++n) out[n] = a[n + 1] * a[n + 1] - a[n];
  out[M] = closure * closure - a[M];
}

std::size_t snapshot_index(const Trajectory& traj, double t) {
  const double eps = 1e-9 * std::max(1.0, std::abs(t));
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (std::abs(traj.times[i] - t) <= eps) return i;
  fail(ErrorKind::parameter, "t = " + std::to_string(t) + " is not a snapshot time of the trajectory");
}

}  // namespace

double generating_function(const Pmf& p, double x) {
  if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::parameter, "generating function argument must lie in [0,1]");
  const auto w = p.weights();
  double r = 0.0;
  for (std::size_t k = w.size(); k-- > 0;) r = r * x + w[k];
  return r;
}

double pde_residual(const Trajectory& traj, double x, double t) {
  const std::size_t i = snapshot_index(traj, t);
  if (i == 0 || i + 1 >= traj.size())
    fail(ErrorKind::precondition, "pde_residual needs an interior point; t = " + std::to_string(t) +
                                      " is at the trajectory boundary");
  const double hm = traj.times[i] - traj.times[i - 1];
  const double hp = traj.times[i + 1] - traj.times[i];
  const double y = (1.0 + x) / 2.0;
  const double f_prev = generating_function(traj.states[i - 1], x);
  const double f = generating_function(traj.states[i], x);
  const double f_next = generating_function(traj.states[i + 1], x);
  const double dfdt = -hp / (hm * (hm + hp)) * f_prev + (hp - hm) / (hm * hp) * f + hm / (hp * (hm + hp)) * f_next;
  const double g = generating_function(traj.states[i], y);
  return std::abs(dfdt + f - g * g);
}

ASystemState limit_profile(double mu, std::size_t M) {
  if (!(mu >= 0.0)) fail(ErrorKind::parameter, "mu must be nonnegative");
  ASystemState s;
  s.mu = mu;
  s.a.resize(M + 1);
  for (std::size_t n = 0; n <= M; ++n) s.a[n] = std::exp(-mu * std::ldexp(1.0, -static_cast<int>(n)));
  return s;
}

ASystemState from_pmf(const Pmf& p, std::size_t M) {
  ASystemState s;
  s.mu = mean(p);
  s.a.resize(M + 1);
  for (std::size_t n = 0; n <= M; ++n)
    s.a[n] = generating_function(p, 1.0 - std::ldexp(1.0, -static_cast<int>(n)));
  return s;
}

ASystemTrajectory integrate_a_system(const ASystemState& a0, double t_end, double dt, std::size_t record_every) {
  if (a0.a.empty()) fail(ErrorKind::parameter, "a-system needs at least one entry");
  if (!(dt > 0.0) || !(t_end >= 0.0)) fail(ErrorKind::parameter, "a-system needs dt > 0 and t_end >= 0");
  if (record_every < 1) fail(ErrorKind::parameter, "record_every must be at least 1");
  check_cube(a0.a, 0.0);

  const std::size_t M = a0.depth();
  const double closure = std::exp(-a0.mu * std::ldexp(1.0, -static_cast<int>(M + 1)));
  const std::vector<double> grid = uniform_grid(t_end, dt);

  ASystemTrajectory out;
  out.times.push_back(0.0);
  out.states.push_back(a0);
  std::vector<double> a = a0.a, k1(M + 1), k2(M + 1), k3(M + 1), k4(M + 1), tmp(M + 1);
  for (std::size_t s = 1; s < grid.size(); ++s) {
    const double h = grid[s] - grid[s - 1];
    a_rhs(a, closure, k1);
    for (std::size_t n = 0; n <= M; ++n) tmp[n] = a[n] + 0.5 * h * k1[n];
    a_rhs(tmp, closure, k2);
    for (std::size_t n = 0; n <= M; ++n) tmp[n] = a[n] + 0.5 * h * k2[n];
    a_rhs(tmp, closure, k3);
    for (std::size_t n = 0; n <= M; ++n) tmp[n] = a[n] + h * k3[n];
    a_rhs(tmp, closure, k4);
    for (std::size_t n = 0; n <= M; ++n) a[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    check_cube(a, grid[s]);
    if (s % record_every == 0 || s + 1 == grid.size()) {
      out.times.push_back(grid[s]);
      out.states.push_back(ASystemState{a, a0.mu});
    }
  }
  return out;
}

std::vector<double> limit_gaps(const ASystemState& s, double mu) {
  const ASystemState ref = limit_profile(mu, s.depth());
  std::vector<double> g(s.a.size());
  for (std::size_t n = 0; n < g.size(); ++n) g[n] = std::abs(s.a[n] - ref.a[n]);
  return g;
}

std::vector<double> realized_mu(const ASystemState& s) {
  std::vector<double> m(s.a.size());
  for (std::size_t n = 0; n < m.size(); ++n)
    m[n] = s.a[n] > 0.0 ? -std::ldexp(std::log(s.a[n]), static_cast<int>(n)) : std::numeric_limits<double>::infinity();
  return m;
}

std::size_t envelope_violations(const ASystemTrajectory& traj, double mu_lo, double mu_hi, double tol) {
  if (!(mu_lo <= mu_hi)) fail(ErrorKind::parameter, "envelope needs mu_lo <= mu_hi");
  std::size_t count = 0;
  for (const auto& s : traj.states) {
    const ASystemState lower = limit_profile(mu_hi, s.depth());
    const ASystemState upper = limit_profile(mu_lo, s.depth());
    for (std::size_t n = 0; n < s.a.size(); ++n)
      if (s.a[n] < lower.a[n] - tol || s.a[n] > upper.a[n] + tol) ++count;
  }
  return count;
}

}  // namespace kinex

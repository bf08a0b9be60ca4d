#pragma once

// Generating function phi(x, t) = sum p_n(t) x^n of the mean-field law and
// the sampled system a_n(t) = phi(1 - 2^-n, t), which solves
// a_n' = a_{n+1}^2 - a_n.

#include <cstddef>
#include <span>
#include <vector>

#include "kinex/meanfield.hpp"
#include "kinex/pmf.hpp"

namespace kinex {

// Horner evaluation, x in [0, 1].
double generating_function(const Pmf& p, double x);

// |d/dt phi(x,t) + phi(x,t) - phi((1+x)/2, t)^2| at snapshot time t, with the
// time derivative from the three-point centred difference on the neighbouring
// snapshots. t must be a snapshot time with a neighbour on each side.
double pde_residual(const Trajectory& traj, double x, double t);

struct ASystemState {
  std::vector<double> a;  // a_0 .. a_M
  double mu = 0.0;        // tail parameter for the closure a_{M+1} = exp(-mu 2^-(M+1))

  std::size_t depth() const noexcept { return a.size() - 1; }
};

// a_n = exp(-mu 2^-n), n = 0..M.
ASystemState limit_profile(double mu, std::size_t M);

// a_n = phi(1 - 2^-n) for p, with the closure parameter set to mean(p).
ASystemState from_pmf(const Pmf& p, std::size_t M);

struct ASystemTrajectory {
  std::vector<double> times;
  std::vector<ASystemState> states;

  std::size_t size() const noexcept { return times.size(); }
};

// RK4 with step dt (last step shortened), recording every `record_every` steps
// and at t_end. Leaving [0,1] by more than 1e-12 raises a numerical error that
// names the first offending index.
ASystemTrajectory integrate_a_system(const ASystemState& a0, double t_end, double dt, std::size_t record_every = 1);

// |a_n - exp(-mu 2^-n)| per index.
std::vector<double> limit_gaps(const ASystemState& s, double mu);

// -2^n log a_n per index; +inf where a_n = 0.
std::vector<double> realized_mu(const ASystemState& s);

// Number of recorded (t, n) with a_n outside [exp(-mu_hi 2^-n), exp(-mu_lo 2^-n)] by more than tol.
std::size_t envelope_violations(const ASystemTrajectory& traj, double mu_lo, double mu_hi, double tol = 1e-12);

}  // namespace kinex

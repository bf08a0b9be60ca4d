#include <doctest.h>

#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "kinex/meanfield.hpp"
#include "kinex/metrics.hpp"
#include "oracles.hpp"

using namespace kinex;

TEST_CASE("q operator matches the literal double sum") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = oracle::random_pmf(rng, 1 + rng() % 25);
    const SignedVector q = q_operator(Pmf(p));
    const auto ref = oracle::q_double_sum(p);
    for (std::size_t n = 0; n < p.size(); ++n) CHECK(std::abs(q.entries[n] - ref[n]) < 1e-13);
    // Q conserves mass once the leaked gain is counted.
    CHECK(std::abs(q.sum() + q.leakage) < 1e-13);
  }
}

TEST_CASE("q operator vanishes on a dirac at zero") {
  const SignedVector q = q_operator(Pmf::dirac(0));
  CHECK(q.entries == std::vector<double>{0.0});
  CHECK(q.leakage == 0.0);
}

TEST_CASE("poisson is an equilibrium") {
  CHECK(equilibrium_residual(5.0, 60) < 1e-12);
  CHECK(equilibrium_residual(1.0, 30) < 1e-12);
  CHECK(equilibrium_residual(12.0, 90) < 1e-12);
}

TEST_CASE("default truncation") {
  const std::size_t K = default_truncation(5.0);
  double tail = 0.0;
  const auto w = oracle::poisson_recurrence(5.0, K + 200);
  for (std::size_t k = K + 1; k < w.size(); ++k) tail += w[k];
  CHECK(tail < 1e-30);
  CHECK(kind_of([] { default_truncation(1000.0); }) == ErrorKind::size);
}

TEST_CASE("ode config validation") {
  OdeConfig cfg;
  cfg.dt = 0.0;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::configuration);
  cfg.dt = 0.2;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::configuration);
  cfg.dt = 0.01;
  cfg.K = kMaxTruncation + 1;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::size);
  cfg.K = 60;
  cfg.snapshot_times = {0.5, 0.2};
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::configuration);
  cfg.snapshot_times = {2.0};
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::configuration);
}

TEST_CASE("uniform grid includes the endpoint") {
  CHECK(uniform_grid(1.0, 0.25) == std::vector<double>{0, 0.25, 0.5, 0.75, 1.0});
  const auto g = uniform_grid(1.1, 0.25);
  CHECK(g.back() == 1.1);
  CHECK(g.size() == 6);
}

TEST_CASE("integrate from a dirac keeps mean and follows the second-moment law") {
  OdeConfig cfg;
  cfg.K = 60;
  cfg.dt = 0.01;
  cfg.t_end = 3.0;
  cfg.snapshot_times = uniform_grid(3.0, 0.1);
  const Trajectory tr = integrate(Pmf::dirac(5), cfg);
  REQUIRE(tr.size() == cfg.snapshot_times.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(std::abs(mean(tr.states[i]) - 5.0) < 1e-10);
    CHECK(std::abs(second_moment(tr.states[i]) - second_moment_forecast(5.0, 25.0, tr.times[i])) < 1e-8);
    CHECK(tr.mass_defect[i] < 1e-12);
    for (double w : tr.states[i].weights()) CHECK(w >= 0.0);
  }
}

TEST_CASE("poisson start stays put") {
  OdeConfig cfg;
  cfg.K = 60;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.0, 1.0};
  const Pmf p = poisson_pmf(5.0, 60);
  const Trajectory tr = integrate(p, cfg);
  for (std::size_t n = 0; n <= 30; ++n) CHECK(std::abs(tr.states[1][n] - p[n]) < 1e-12);
}

TEST_CASE("moment laws hold for random starts") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 8; ++trial) {
    const Pmf p0(oracle::random_pmf(rng, 8));
    OdeConfig cfg;
    cfg.K = 60;
    cfg.t_end = 2.0;
    cfg.snapshot_times = {0.0, 0.5, 1.0, 2.0};
    const Trajectory tr = integrate(p0, cfg);
    const double mu = mean(p0), m2 = second_moment(p0);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      CHECK(std::abs(mean(tr.states[i]) - mu) < 1e-10);
      CHECK(std::abs(second_moment(tr.states[i]) - second_moment_forecast(mu, m2, tr.times[i])) < 1e-8);
    }
  }
}

TEST_CASE("too small a truncation is reported, not renormalized") {
  OdeConfig cfg;
  cfg.K = 10;
  cfg.t_end = 2.0;
  cfg.snapshot_times = {2.0};
  CHECK(kind_of([&] { integrate(Pmf::dirac(5), cfg); }) == ErrorKind::truncation);
}

TEST_CASE("p0 wider than K is a configuration error") {
  OdeConfig cfg;
  cfg.K = 4;
  CHECK(kind_of([&] { integrate(Pmf::dirac(5), cfg); }) == ErrorKind::configuration);
}

TEST_CASE("W2 distance to poisson shrinks along the flow") {
  OdeConfig cfg;
  cfg.K = 60;
  cfg.t_end = 4.0;
  cfg.snapshot_times = uniform_grid(4.0, 0.5);
  const Trajectory tr = integrate(Pmf::dirac(5), cfg);
  const Pmf target = poisson_pmf(5.0, 60);
  double prev = INFINITY;
  for (const Pmf& s : tr.states) {
    const double w = wasserstein(s, target, 2);
    CHECK(w < prev);
    prev = w;
  }
}

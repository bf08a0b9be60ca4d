#include <doctest.h>

#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "kinex/metrics.hpp"
#include "oracles.hpp"

using namespace kinex;

TEST_CASE("wasserstein examples") {
  CHECK(wasserstein(Pmf::dirac(2), Pmf::dirac(5), 1) == 3.0);
  CHECK(wasserstein(Pmf::dirac(2), Pmf::dirac(5), 2) == 3.0);
  const Pmf half({0.5, 0.0, 0.5});
  CHECK(wasserstein(half, Pmf::dirac(1), 1) == doctest::Approx(1.0));
  CHECK(wasserstein(half, Pmf::dirac(1), 2) == doctest::Approx(1.0));
  CHECK(wasserstein(half, Pmf::dirac(0), 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(wasserstein(half, half, 2) == 0.0);
}

TEST_CASE("wasserstein argument checks") {
  CHECK(kind_of([] { wasserstein(Pmf::dirac(1), Pmf::dirac(1), 3); }) == ErrorKind::parameter);
  CHECK(kind_of([] { wasserstein(Pmf({0.5}, 0.5), Pmf::dirac(1), 1); }) == ErrorKind::unreliable_tail);
}

TEST_CASE("wasserstein agrees with a transport solver") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 150; ++trial) {
    const auto p = oracle::random_pmf(rng, rng() % 8), q = oracle::random_pmf(rng, rng() % 8);
    for (int order : {1, 2}) {
      const double got = wasserstein(Pmf(p), Pmf(q), order);
      const double ref = oracle::transport_distance(p, q, order);
      CHECK(std::abs(got - ref) < 1e-10);
    }
  }
}

TEST_CASE("wasserstein is a metric on random pmfs") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const Pmf a(oracle::random_pmf(rng, rng() % 20)), b(oracle::random_pmf(rng, rng() % 20)),
        c(oracle::random_pmf(rng, rng() % 20));
    for (int order : {1, 2}) {
      const double ab = wasserstein(a, b, order), ba = wasserstein(b, a, order);
      CHECK(std::abs(ab - ba) < 1e-12);
      CHECK(ab >= 0.0);
      CHECK(wasserstein(a, a, order) < 1e-12);
      CHECK(wasserstein(a, c, order) <= ab + wasserstein(b, c, order) + 1e-12);
    }
    CHECK(wasserstein(a, b, 1) <= wasserstein(a, b, 2) + 1e-12);
  }
}

TEST_CASE("wasserstein of a shifted pmf is the shift") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = oracle::random_pmf(rng, rng() % 15);
    const std::size_t shift = 1 + rng() % 6;
    std::vector<double> moved(shift, 0.0);
    moved.insert(moved.end(), w.begin(), w.end());
    for (int order : {1, 2}) CHECK(wasserstein(Pmf(w), Pmf(moved), order) == doctest::Approx(double(shift)));
  }
}

TEST_CASE("total variation") {
  CHECK(total_variation(Pmf::dirac(0), Pmf::dirac(3)) == 1.0);
  CHECK(total_variation(Pmf({0.5, 0.5}), Pmf({0.25, 0.75})) == doctest::Approx(0.25));
}

TEST_CASE("gini examples") {
  const std::vector<double> equal(10, 3.0);
  CHECK(gini(equal) == 0.0);
  std::vector<double> rich(100, 0.0);
  rich[7] = 50.0;
  CHECK(gini(rich) == doctest::Approx(0.99).epsilon(1e-12));
  const std::vector<double> two{0.0, 1.0};
  CHECK(gini(two) == doctest::Approx(0.5));
  CHECK(kind_of([] { gini(std::vector<double>{}); }) == ErrorKind::undefined);
  CHECK(kind_of([] { gini(std::vector<double>{0.0, 0.0}); }) == ErrorKind::undefined);
  CHECK(kind_of([] { gini(std::vector<double>{1.0, -1.0}); }) == ErrorKind::parameter);
}

TEST_CASE("gini properties on random populations") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(2 + rng() % 200);
    for (auto& v : x) v = u(rng);
    const double g = gini(x);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0 - 1.0 / static_cast<double>(x.size()) + 1e-12);

    // Naive double sum over all pairs.
    double diff = 0.0, total = 0.0;
    for (double a : x) {
      total += a;
      for (double b : x) diff += std::abs(a - b);
    }
    const double n = static_cast<double>(x.size());
    CHECK(std::abs(g - diff / (2.0 * n * total)) < 1e-12);

    auto scaled = x;
    for (auto& v : scaled) v *= 4.0;
    CHECK(gini(scaled) == g);
    for (auto& v : scaled) v = v / 4.0 * 3.7;
    CHECK(std::abs(gini(scaled) - g) < 1e-13);

    auto perm = x;
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(std::abs(gini(perm) - g) < 1e-15);
  }
}

TEST_CASE("gini of a pmf matches the population it describes") {
  const Pmf p({0.1, 0.2, 0.3, 0.4});
  std::vector<double> pop;
  for (int k = 0; k < 4; ++k)
    for (int c = 0; c < (k + 1) * 10; ++c) pop.push_back(k);
  CHECK(std::abs(gini(p) - gini(pop)) < 1e-12);
  CHECK(kind_of([] { gini(Pmf::dirac(0)); }) == ErrorKind::undefined);
}

TEST_CASE("decay fits recover exact laws") {
  TraceSeries expo, power;
  for (int i = 1; i <= 40; ++i) {
    const double t = 0.25 * i;
    expo.times.push_back(t);
    expo.values.push_back(3.0 * std::exp(-0.7 * t));
    power.times.push_back(t);
    power.values.push_back(2.0 * std::pow(t, -0.5));
  }
  const DecayFit e = fit_decay(expo, 0.0, 100.0);
  CHECK(e.exp_rate == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(e.exp_r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.points == 40);
  const DecayFit p = fit_decay(power, 0.0, 100.0);
  CHECK(p.poly_exponent == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(p.poly_r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.exp_r2 < 0.99);

  CHECK(fit_decay(expo, 1.0, 5.0).points == 17);
}

TEST_CASE("decay fit domain errors") {
  TraceSeries s;
  for (int i = 0; i < 12; ++i) {
    s.times.push_back(i);
    s.values.push_back(1.0 / (1 + i));
  }
  CHECK(kind_of([&] { fit_decay(s, 0.0, 20.0); }) == ErrorKind::log_domain);
  CHECK(kind_of([&] { fit_decay(s, 1.0, 5.0); }) == ErrorKind::parameter);
  s.values[5] = 0.0;
  CHECK(kind_of([&] { fit_decay(s, 1.0, 20.0); }) == ErrorKind::log_domain);
  s.times[3] = s.times[2];
  CHECK(kind_of([&] { fit_decay(s, 1.0, 20.0); }) == ErrorKind::parameter);
  s.values.pop_back();
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::parameter);
}

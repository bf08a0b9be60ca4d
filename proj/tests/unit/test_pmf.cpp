#include <doctest.h>

#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "kinex/pmf.hpp"
#include "oracles.hpp"

using namespace kinex;

namespace {

std::vector<double> vec(const Pmf& p) { return {p.weights().begin(), p.weights().end()}; }

}  // namespace

TEST_CASE("pmf construction rejects bad weights") {
  CHECK(kind_of([] { Pmf(std::vector<double>{}); }) == ErrorKind::parameter);
  CHECK(kind_of([] { Pmf({0.5, -0.1, 0.6}); }) == ErrorKind::parameter);
  CHECK(kind_of([] { Pmf({0.5, NAN}); }) == ErrorKind::parameter);
  CHECK(kind_of([] { Pmf({1.0}, -1e-3); }) == ErrorKind::parameter);
  const Pmf d = Pmf::dirac(3);
  CHECK(d.max_index() == 3);
  CHECK(d[3] == 1.0);
  CHECK(d[10] == 0.0);
  CHECK(d.normalized());
}

TEST_CASE("truncated moves cut mass into the defect") {
  const Pmf p({0.25, 0.25, 0.25, 0.25});
  const Pmf t = p.truncated(1);
  CHECK(t.size() == 2);
  CHECK(t.trunc_defect() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t.normalized());
  CHECK(p.truncated(5).size() == 6);
  CHECK(p.truncated(5)[5] == 0.0);
}

TEST_CASE("poisson pmf") {
  const Pmf p = poisson_pmf(5.0, 60);
  CHECK(std::abs(p[0] - 6.737947e-3) < 1e-9);
  CHECK(std::abs(p[0] - std::exp(-5.0)) < 1e-18);
  CHECK(std::abs(mean(p) - 5.0) < 1e-12);
  CHECK(std::abs(variance(p) - 5.0) < 1e-10);
  CHECK(p.normalized(1e-15));

  const auto ref = oracle::poisson_recurrence(5.0, 60);
  for (std::size_t k = 0; k <= 60; ++k) CHECK(std::abs(p[k] - ref[k]) <= 1e-13 * ref[k]);

  CHECK(kind_of([] { poisson_pmf(0.0, 5); }) == ErrorKind::parameter);
  CHECK(kind_of([] { poisson_pmf(-1.0, 5); }) == ErrorKind::parameter);
}

TEST_CASE("poisson tail weight at 56 for rate 5.15 sits below quadruple precision") {
  const Pmf p = poisson_pmf(5.15, 56);
  const auto ref = oracle::poisson_recurrence(5.15, 56);
  CHECK(std::abs(p[56] - ref[56]) <= 1e-12 * ref[56]);
  CHECK(p[56] < 1.93e-34);
  CHECK(p[56] > 1e-40);
}

TEST_CASE("binomial pmf") {
  CHECK(vec(binomial_pmf(2, 0.5)) == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(vec(binomial_pmf(0, 0.5)) == std::vector<double>{1.0});
  const Pmf b = binomial_pmf(20, 0.25);
  CHECK(std::abs(mean(b) - 5.0) < 1e-13);
  CHECK(std::abs(variance(b) - 3.75) < 1e-12);
  CHECK(std::abs(second_moment(b) - 28.75) < 1e-12);
  for (std::size_t k = 0; k <= 20; ++k) CHECK(std::abs(b[k] - oracle::binomial_term(20, 0.25, k)) < 1e-15);
  CHECK(vec(binomial_pmf(3, 0.0)) == std::vector<double>{1, 0, 0, 0});
  CHECK(vec(binomial_pmf(3, 1.0)) == std::vector<double>{0, 0, 0, 1});
  CHECK(kind_of([] { binomial_pmf(3, 1.5); }) == ErrorKind::parameter);
  CHECK(kind_of([] { binomial_pmf(3, -0.1); }) == ErrorKind::parameter);
}

TEST_CASE("thinning kernel matches exact binomials") {
  const ThinningKernel h(60);
  const auto c = oracle::pascal(60);
  for (std::size_t m = 0; m <= 60; ++m)
    for (std::size_t n = 0; n <= m; ++n) {
      const double exact = static_cast<double>(c[m][n]) / std::ldexp(1.0, static_cast<int>(m));
      CHECK(std::abs(h(m, n) - exact) <= 1e-13 * exact);
    }
}

TEST_CASE("collision gain examples") {
  const Pmf g = collision_gain(Pmf::dirac(1), Pmf::dirac(1));
  CHECK(vec(g) == std::vector<double>{0.25, 0.5, 0.25});

  const Pmf z = collision_gain(Pmf::dirac(0), Pmf::dirac(0));
  CHECK(vec(z) == std::vector<double>{1.0});

  const Pmf b = collision_gain(binomial_pmf(10, 0.5), binomial_pmf(10, 0.5));
  const Pmf target = binomial_pmf(20, 0.25);
  REQUIRE(b.size() == target.size());
  for (std::size_t k = 0; k < b.size(); ++k) CHECK(std::abs(b[k] - target[k]) < 1e-14);

  const Pmf p = poisson_pmf(5.0, 80);
  const Pmf q = collision_gain(p, p);
  CHECK(q.max_index() == 160);
  for (std::size_t k = 0; k <= 40; ++k) CHECK(std::abs(q[k] - p[k]) < 1e-12);
}

TEST_CASE("collision gain truncation and defect") {
  const Pmf p({0.5, 0.5}, 0.0);
  const Pmf q({0.2, 0.3, 0.4}, 0.1);
  const Pmf g = collision_gain(p, q);
  CHECK(g.max_index() == 3);
  CHECK(g.trunc_defect() == doctest::Approx(0.1));
}

TEST_CASE("collision gain matches coin enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t a = rng() % 7, b = rng() % 7;
    const auto p = oracle::random_pmf(rng, a), q = oracle::random_pmf(rng, b);
    const Pmf g = collision_gain(Pmf(p), Pmf(q));
    const auto ref = oracle::collision_by_coins(p, q);
    REQUIRE(g.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(g[k] - ref[k]) < 1e-14);
  }
}

TEST_CASE("collision gain conserves mass and mean") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_pmf(rng, 1 + rng() % 60);
    const auto q = oracle::random_pmf(rng, 1 + rng() % 60);
    const Pmf P(p), Q(q);
    CHECK(std::abs(collision_gain(P, Q).total() - P.total() * Q.total()) <= 1e-12);
    const Pmf self = collision_gain(P, P);
    CHECK(std::abs(mean(self) - mean(P)) <= 1e-10);
  }
}

TEST_CASE("binomial laws are closed under reshuffling") {
  for (std::size_t n = 2; n <= 40; ++n) {
    const double nn = static_cast<double>(n);
    for (double mu : {0.5, 1.0, nn / 3.0, nn / 2.0, 0.9 * nn, nn}) {
      const Pmf b = binomial_pmf(n, mu / nn);
      const Pmf g = collision_gain(b, b);
      const Pmf target = binomial_pmf(2 * n, mu / (2.0 * nn));
      REQUIRE(g.size() == target.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(g[k] - target[k]));
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("moments") {
  const Pmf d = Pmf::dirac(5);
  CHECK(mean(d) == 5.0);
  CHECK(second_moment(d) == 25.0);
  CHECK(variance(d) == 0.0);
}

TEST_CASE("cdf and quantile") {
  CHECK(quantile(Pmf::dirac(3), 0.5) == 3);
  CHECK(quantile(Pmf({0.25, 0.5, 0.25}), 0.75) == 1);
  CHECK(quantile(Pmf({0.25, 0.5, 0.25}), 1.0) == 2);

  const auto ref = oracle::poisson_recurrence(5.0, 60);
  const double F4 = ref[0] + ref[1] + ref[2] + ref[3] + ref[4];
  const double F5 = F4 + ref[5];
  CHECK(F4 == doctest::Approx(0.4405).epsilon(1e-4));
  CHECK(F5 == doctest::Approx(0.6160).epsilon(1e-4));
  CHECK(quantile(poisson_pmf(5.0, 60), 0.5) == 5);

  CHECK(kind_of([] { quantile(Pmf::dirac(1), 0.0); }) == ErrorKind::parameter);
  CHECK(kind_of([] { quantile(Pmf::dirac(1), 1.5); }) == ErrorKind::parameter);

  // Deficient tail: no k reaches z.
  CHECK(quantile(Pmf({0.5, 0.3}, 0.2), 0.9) == 1);
}

TEST_CASE("every atom is reachable through the quantile") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Pmf p(oracle::random_pmf(rng, rng() % 30));
    const auto F = cdf(p);
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p[k] > 0.0) CHECK(quantile(p, std::min(F[k], 1.0)) == k);
  }
}

TEST_CASE("signed vector sum") {
  SignedVector v{{0.25, -0.5, 0.25}, 0.0};
  CHECK(v.sum() == 0.0);
}

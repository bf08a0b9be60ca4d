#include <doctest.h>

#include <cmath>
#include <numeric>

#include "expect_error.hpp"
#include "kinex/agent_sim.hpp"
#include "kinex/exact_chain.hpp"
#include "oracles.hpp"

using namespace kinex;

namespace {

std::vector<std::uint32_t> to_vec(std::span<const std::uint32_t> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("composition count") {
  CHECK(composition_count(2, 2) == 3);
  CHECK(composition_count(3, 6) == 28);
  CHECK(composition_count(4, 4) == 35);
  CHECK(composition_count(3, 10) == 66);
  CHECK(composition_count(10, 30) == 211915132);
  CHECK(composition_count(200, 4000) == UINT64_MAX);
}

TEST_CASE("config space enumerates compositions in lexicographic order") {
  for (auto [N, total] : {std::pair{2u, 2u}, {3u, 6u}, {4u, 4u}, {3u, 10u}, {5u, 3u}}) {
    const ConfigSpace space(N, total);
    const auto ref = oracle::compositions(N, total);
    REQUIRE(space.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(to_vec(space.state(k)) == ref[k]);
      CHECK(space.index_of(ref[k]) == k);
    }
  }
  const ConfigSpace two(2, 2);
  CHECK(to_vec(two.state(0)) == std::vector<std::uint32_t>{0, 2});
  CHECK(to_vec(two.state(2)) == std::vector<std::uint32_t>{2, 0});
}

TEST_CASE("config space checks") {
  CHECK(kind_of([] { ConfigSpace(1, 3); }) == ErrorKind::parameter);
  CHECK(kind_of([] { ConfigSpace(10, 30); }) == ErrorKind::size);
  const ConfigSpace s(3, 4);
  CHECK(kind_of([&] { s.index_of(std::vector<std::uint32_t>{1, 1, 1}); }) == ErrorKind::parameter);
  CHECK(kind_of([&] { s.index_of(std::vector<std::uint32_t>{5, 0, 0}); }) == ErrorKind::parameter);
  CHECK(kind_of([&] { s.index_of(std::vector<std::uint32_t>{4, 0}); }) == ErrorKind::parameter);
}

TEST_CASE("transition matrix matches coin enumeration") {
  for (auto [N, total] : {std::pair{2u, 2u}, {3u, 6u}, {4u, 4u}, {3u, 10u}}) {
    const Chain c = build_chain(N, total);
    const auto ref = oracle::chain_by_coins(N, total);
    const std::size_t S = ref.size();
    REQUIRE(c.matrix.rows() == S);
    double worst = 0.0;
    for (std::size_t r = 0; r < S; ++r) {
      double row = 0.0;
      for (std::size_t k = c.matrix.row_start[r]; k < c.matrix.row_start[r + 1]; ++k) {
        row += c.matrix.prob[k];
        CHECK(c.matrix.prob[k] > 0.0);
        if (k > c.matrix.row_start[r]) CHECK(c.matrix.col[k] > c.matrix.col[k - 1]);
      }
      CHECK(std::abs(row - 1.0) < 1e-14);
      for (std::size_t col = 0; col < S; ++col) worst = std::max(worst, std::abs(c.matrix.at(r, col) - ref[r][col]));
    }
    CHECK(worst < 1e-15);
  }
}

TEST_CASE("two agents with two dollars") {
  const Chain c = build_chain(2, 2);
  // (0,2) -> (1,1) with probability C(2,1)/4.
  CHECK(c.matrix.at(0, 1) == 0.5);
  CHECK(c.matrix.at(1, 1) == 0.5);
  const StationaryResult st = stationary(c);
  CHECK(std::abs(st.pi[0] - 0.25) < 1e-13);
  CHECK(std::abs(st.pi[1] - 0.5) < 1e-13);
  CHECK(st.residual < 1e-13);
}

TEST_CASE("multinomial law") {
  const std::vector<std::uint32_t> s{1, 2, 0};
  // 3!/(1!2!0!) / 27
  CHECK(multinomial_weight(s, 3, 3) == doctest::Approx(3.0 / 27.0).epsilon(1e-14));
  const ConfigSpace space(4, 6);
  const auto law = multinomial_law(space);
  CHECK(std::abs(std::accumulate(law.begin(), law.end(), 0.0) - 1.0) < 1e-14);
  CHECK(kind_of([&] { multinomial_weight(s, 3, 4); }) == ErrorKind::parameter);
}

TEST_CASE("stationary law is multinomial and reversible") {
  for (auto [N, total] : {std::pair{2u, 2u}, {3u, 6u}, {4u, 4u}, {3u, 10u}, {5u, 5u}}) {
    const Chain c = build_chain(N, total);
    const StationaryResult st = stationary(c);
    const auto law = multinomial_law(c.space);
    double worst = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k) worst = std::max(worst, std::abs(st.pi[k] - law[k]));
    CHECK(worst < 1e-12);
    CHECK(detailed_balance_residual(c) < 1e-13);
    for (std::uint32_t agent = 0; agent < N; ++agent)
      for (std::uint32_t n = 0; n <= total; ++n)
        CHECK(std::abs(marginal(c.space, st.pi, agent, n) - binomial_marginal(N, total, n)) < 1e-12);
  }
}

TEST_CASE("binomial marginal") {
  CHECK(binomial_marginal(3, 6, 2) == doctest::Approx(oracle::binomial_term(6, 1.0 / 3.0, 2)));
  CHECK(binomial_marginal(3, 6, 7) == 0.0);
}

TEST_CASE("power iteration reports non-convergence") {
  const Chain c = build_chain(3, 10);
  CHECK(kind_of([&] { stationary(c, 1e-13, 3); }) == ErrorKind::numerical);
}

TEST_CASE("marginal checks") {
  const Chain c = build_chain(2, 2);
  const std::vector<double> pi{1.0, 0.0, 0.0};
  CHECK(marginal(c.space, pi, 0, 0) == 1.0);
  CHECK(kind_of([&] { marginal(c.space, pi, 2, 0); }) == ErrorKind::parameter);
  CHECK(kind_of([&] { marginal(c.space, std::vector<double>{1.0}, 0, 0); }) == ErrorKind::parameter);
}

TEST_CASE("poisson limit gap shrinks with N") {
  for (std::uint32_t n = 0; n <= 6; ++n) {
    double prev = INFINITY;
    for (std::uint32_t N : {4u, 8u, 16u, 32u, 64u}) {
      const double g = poisson_limit_gap(N, 2.0, n);
      CHECK(g < prev);
      prev = g;
    }
  }
  CHECK(kind_of([] { poisson_limit_gap(3, 0.5, 0); }) == ErrorKind::parameter);
  CHECK(kind_of([] { poisson_limit_gap(3, 0.0, 0); }) == ErrorKind::parameter);
}

TEST_CASE("simulated chain visits states with the multinomial frequencies") {
  const std::uint32_t N = 3, total = 6;
  const ConfigSpace space(N, total);
  const auto law = multinomial_law(space);
  WealthState w = WealthState::integers({2, 2, 2});
  Rng rng = make_rng(71);
  std::vector<double> freq(space.size(), 0.0);
  const std::uint64_t events = 5'000'000;
  std::vector<std::uint32_t> cur(N);
  std::uint64_t samples = 0;
  for (std::uint64_t e = 1; e <= events; ++e) {
    step(w, ExchangeRule::binomial(), rng);
    if (e % 10 != 0) continue;
    for (std::uint32_t i = 0; i < N; ++i) cur[i] = static_cast<std::uint32_t>(w.integer_values()[i]);
    freq[space.index_of(cur)] += 1.0;
    ++samples;
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < law.size(); ++k) tv += std::abs(freq[k] / static_cast<double>(samples) - law[k]);
  CHECK(0.5 * tv < 0.01);
}

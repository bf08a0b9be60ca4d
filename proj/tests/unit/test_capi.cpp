#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "kinex/kinex.h"

TEST_CASE("version and status names") {
  CHECK(std::string(kinex_version()) == "0.1.0");
  CHECK(std::string(kinex_status_name(KINEX_E_VALIDATION)) == "validation");
  CHECK(std::string(kinex_status_name(KINEX_OK)) == "ok");
}

TEST_CASE("pmf handles") {
  kinex_pmf* p = nullptr;
  REQUIRE(kinex_pmf_poisson(5.0, 60, &p) == KINEX_OK);
  CHECK(kinex_pmf_size(p) == 61);
  double m = 0, m2 = 0, v = 0;
  REQUIRE(kinex_pmf_moments(p, &m, &m2, &v) == KINEX_OK);
  CHECK(std::abs(m - 5.0) < 1e-12);
  CHECK(std::abs(v - 5.0) < 1e-10);
  std::vector<double> w(61);
  REQUIRE(kinex_pmf_weights(p, w.data(), w.size()) == KINEX_OK);
  CHECK(std::abs(w[0] - std::exp(-5.0)) < 1e-18);
  size_t median = 0;
  REQUIRE(kinex_pmf_quantile(p, 0.5, &median) == KINEX_OK);
  CHECK(median == 5);
  double phi = 0;
  REQUIRE(kinex_generating_function(p, 0.5, &phi) == KINEX_OK);
  CHECK(std::abs(phi - std::exp(-2.5)) < 1e-14);
  kinex_pmf_free(p);
}

TEST_CASE("errors carry a status and a message") {
  kinex_pmf* p = nullptr;
  const double bad[] = {0.5, -0.5};
  CHECK(kinex_pmf_create(bad, 2, 0.0, &p) == KINEX_E_PARAMETER);
  CHECK(std::strlen(kinex_last_error()) > 0);
  CHECK(p == nullptr);
  CHECK(kinex_pmf_dirac(2, nullptr) == KINEX_E_NULL_ARGUMENT);
  CHECK(kinex_pmf_parse("normal:1", &p) == KINEX_E_PARAMETER);
  REQUIRE(kinex_pmf_dirac(2, &p) == KINEX_OK);
  CHECK(std::strlen(kinex_last_error()) == 0);
  double d = 0;
  CHECK(kinex_wasserstein(p, p, 3, &d) == KINEX_E_PARAMETER);
  kinex_pmf_free(p);
  double g = 0;
  CHECK(kinex_gini(nullptr, 0, &g) == KINEX_E_UNDEFINED);
  kinex_chain* c = nullptr;
  CHECK(kinex_chain_build(10, 30, &c) == KINEX_E_SIZE);
  kinex_pmf_free(nullptr);
}

TEST_CASE("collision gain and distances through the C API") {
  kinex_pmf *a = nullptr, *b = nullptr, *g = nullptr;
  REQUIRE(kinex_pmf_dirac(1, &a) == KINEX_OK);
  REQUIRE(kinex_pmf_parse("dirac:4", &b) == KINEX_OK);
  REQUIRE(kinex_collision_gain(a, a, &g) == KINEX_OK);
  double w[3];
  REQUIRE(kinex_pmf_weights(g, w, 3) == KINEX_OK);
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.5);
  double d1 = 0, tv = 0;
  REQUIRE(kinex_wasserstein(a, b, 1, &d1) == KINEX_OK);
  CHECK(d1 == 3.0);
  REQUIRE(kinex_total_variation(a, b, &tv) == KINEX_OK);
  CHECK(tv == 1.0);
  kinex_pmf_free(a);
  kinex_pmf_free(b);
  kinex_pmf_free(g);
}

TEST_CASE("mean-field trajectory through the C API") {
  double r = 1;
  REQUIRE(kinex_equilibrium_residual(5.0, 60, &r) == KINEX_OK);
  CHECK(r < 1e-12);
  kinex_pmf* p0 = nullptr;
  REQUIRE(kinex_pmf_dirac(5, &p0) == KINEX_OK);
  const double snaps[] = {0.0, 0.5, 1.0};
  kinex_trajectory* tr = nullptr;
  REQUIRE(kinex_meanfield_integrate(p0, 60, 0.01, 1.0, snaps, 3, &tr) == KINEX_OK);
  CHECK(kinex_trajectory_size(tr) == 3);
  double t = 0;
  REQUIRE(kinex_trajectory_time(tr, 2, &t) == KINEX_OK);
  CHECK(t == 1.0);
  kinex_pmf* last = nullptr;
  REQUIRE(kinex_trajectory_state(tr, 2, &last) == KINEX_OK);
  double m2 = 0;
  REQUIRE(kinex_pmf_moments(last, nullptr, &m2, nullptr) == KINEX_OK);
  CHECK(std::abs(m2 - (30.0 - 5.0 * std::exp(-0.5))) < 1e-8);
  CHECK(kinex_trajectory_state(tr, 3, &last) == KINEX_E_PARAMETER);
  CHECK(kinex_meanfield_integrate(p0, 3, 0.01, 1.0, nullptr, 0, &tr) == KINEX_E_CONFIGURATION);
  kinex_pmf_free(last);
  kinex_trajectory_free(tr);
  kinex_pmf_free(p0);
}

TEST_CASE("chain through the C API") {
  kinex_chain* c = nullptr;
  REQUIRE(kinex_chain_build(3, 6, &c) == KINEX_OK);
  CHECK(kinex_chain_states(c) == 28);
  std::vector<double> pi(28);
  double res = 1;
  REQUIRE(kinex_chain_stationary(c, pi.data(), pi.size(), &res) == KINEX_OK);
  CHECK(res < 1e-13);
  // (0,0,6) has multinomial weight 3^-6.
  CHECK(std::abs(pi[0] - std::pow(3.0, -6)) < 1e-12);
  double db = 1;
  REQUIRE(kinex_chain_detailed_balance(c, &db) == KINEX_OK);
  CHECK(db < 1e-13);
  kinex_chain_free(c);
}

TEST_CASE("experiment validation and resolution through the C API") {
  char* out = nullptr;
  REQUIRE(kinex_validate("simulate", "{\"N\": 1}", &out) == KINEX_OK);
  CHECK(std::string(out).find("\"N\"") != std::string::npos);
  kinex_string_free(out);
  REQUIRE(kinex_validate("simulate", "{}", &out) == KINEX_OK);
  CHECK(std::string(out) == "[]");
  kinex_string_free(out);
  CHECK(kinex_validate("simulate", "{nope", &out) == KINEX_E_VALIDATION);
  REQUIRE(kinex_resolve("couple", "{}", &out) == KINEX_OK);
  CHECK(std::string(out).find("\"lambda\": 5.0") != std::string::npos);
  kinex_string_free(out);
  CHECK(kinex_run("chain", "{\"N\": 1}", "/nonexistent/never", 0, &out) == KINEX_E_VALIDATION);
  CHECK(kinex_run(nullptr, "{}", "x", 0, &out) == KINEX_E_NULL_ARGUMENT);
}

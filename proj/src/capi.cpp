#include "kinex/kinex.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "kinex/error.hpp"
#include "kinex/exact_chain.hpp"
#include "kinex/experiments.hpp"
#include "kinex/laplace.hpp"
#include "kinex/meanfield.hpp"
#include "kinex/metrics.hpp"
#include "kinex/pmf.hpp"

struct kinex_pmf {
  kinex::Pmf value;
};
struct kinex_trajectory {
  kinex::Trajectory value;
};
struct kinex_chain {
  kinex::Chain value;
};

namespace {

thread_local std::string last_error;

kinex_status status_of(kinex::ErrorKind k) {
  using kinex::ErrorKind;
  switch (k) {
    case ErrorKind::parameter: return KINEX_E_PARAMETER;
    case ErrorKind::configuration: return KINEX_E_CONFIGURATION;
    case ErrorKind::precondition: return KINEX_E_PRECONDITION;
    case ErrorKind::truncation: return KINEX_E_TRUNCATION;
    case ErrorKind::unreliable_tail: return KINEX_E_UNRELIABLE_TAIL;
    case ErrorKind::numerical: return KINEX_E_NUMERICAL;
    case ErrorKind::size: return KINEX_E_SIZE;
    case ErrorKind::log_domain: return KINEX_E_LOG_DOMAIN;
    case ErrorKind::undefined: return KINEX_E_UNDEFINED;
    case ErrorKind::io: return KINEX_E_IO;
    case ErrorKind::validation: return KINEX_E_VALIDATION;
  }
  return KINEX_E_INTERNAL;
}

template <typename F>
kinex_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return KINEX_OK;
  } catch (const kinex::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return KINEX_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return KINEX_E_INTERNAL;
  }
}

kinex_status null_argument(const char* name) {
  last_error = std::string("null argument: ") + name;
  return KINEX_E_NULL_ARGUMENT;
}

#define KINEX_REQUIRE(ptr) \
  if (!(ptr)) return null_argument(#ptr)

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

kinex::Json parse_config(const char* text) {
  try {
    return kinex::Json::parse(text);
  } catch (const kinex::Json::exception& e) {
    kinex::fail(kinex::ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* kinex_version(void) { return kinex::kVersion; }

const char* kinex_status_name(kinex_status s) {
  switch (s) {
    case KINEX_OK: return "ok";
    case KINEX_E_PARAMETER: return "parameter";
    case KINEX_E_CONFIGURATION: return "configuration";
    case KINEX_E_PRECONDITION: return "precondition";
    case KINEX_E_TRUNCATION: return "truncation";
    case KINEX_E_UNRELIABLE_TAIL: return "unreliable_tail";
    case KINEX_E_NUMERICAL: return "numerical";
    case KINEX_E_SIZE: return "size";
    case KINEX_E_LOG_DOMAIN: return "log_domain";
    case KINEX_E_UNDEFINED: return "undefined";
    case KINEX_E_IO: return "io";
    case KINEX_E_VALIDATION: return "validation";
    case KINEX_E_NULL_ARGUMENT: return "null_argument";
    case KINEX_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* kinex_last_error(void) { return last_error.c_str(); }

kinex_status kinex_pmf_create(const double* weights, size_t count, double trunc_defect, kinex_pmf** out) {
  KINEX_REQUIRE(out);
  if (count > 0) KINEX_REQUIRE(weights);
  return guarded([&] {
    *out = new kinex_pmf{kinex::Pmf(std::vector<double>(weights, weights + count), trunc_defect)};
  });
}

kinex_status kinex_pmf_dirac(size_t k, kinex_pmf** out) {
  KINEX_REQUIRE(out);
  return guarded([&] { *out = new kinex_pmf{kinex::Pmf::dirac(k)}; });
}

kinex_status kinex_pmf_poisson(double lambda, size_t K, kinex_pmf** out) {
  KINEX_REQUIRE(out);
  return guarded([&] { *out = new kinex_pmf{kinex::poisson_pmf(lambda, K)}; });
}

kinex_status kinex_pmf_binomial(size_t n, double gamma, kinex_pmf** out) {
  KINEX_REQUIRE(out);
  return guarded([&] { *out = new kinex_pmf{kinex::binomial_pmf(n, gamma)}; });
}

kinex_status kinex_pmf_parse(const char* text, kinex_pmf** out) {
  KINEX_REQUIRE(text);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = new kinex_pmf{kinex::parse_pmf(text)}; });
}

void kinex_pmf_free(kinex_pmf* p) { delete p; }

size_t kinex_pmf_size(const kinex_pmf* p) { return p ? p->value.size() : 0; }

double kinex_pmf_trunc_defect(const kinex_pmf* p) { return p ? p->value.trunc_defect() : 0.0; }

kinex_status kinex_pmf_weights(const kinex_pmf* p, double* out, size_t capacity) {
  KINEX_REQUIRE(p);
  if (capacity > 0) KINEX_REQUIRE(out);
  return guarded([&] {
    const auto w = p->value.weights();
    std::copy_n(w.begin(), std::min(capacity, w.size()), out);
  });
}

kinex_status kinex_pmf_moments(const kinex_pmf* p, double* mean, double* second_moment, double* variance) {
  KINEX_REQUIRE(p);
  return guarded([&] {
    if (mean) *mean = kinex::mean(p->value);
    if (second_moment) *second_moment = kinex::second_moment(p->value);
    if (variance) *variance = kinex::variance(p->value);
  });
}

kinex_status kinex_pmf_quantile(const kinex_pmf* p, double z, size_t* out) {
  KINEX_REQUIRE(p);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = kinex::quantile(p->value, z); });
}

kinex_status kinex_collision_gain(const kinex_pmf* p, const kinex_pmf* q, kinex_pmf** out) {
  KINEX_REQUIRE(p);
  KINEX_REQUIRE(q);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = new kinex_pmf{kinex::collision_gain(p->value, q->value)}; });
}

kinex_status kinex_wasserstein(const kinex_pmf* p, const kinex_pmf* q, int order, double* out) {
  KINEX_REQUIRE(p);
  KINEX_REQUIRE(q);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = kinex::wasserstein(p->value, q->value, order); });
}

kinex_status kinex_total_variation(const kinex_pmf* p, const kinex_pmf* q, double* out) {
  KINEX_REQUIRE(p);
  KINEX_REQUIRE(q);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = kinex::total_variation(p->value, q->value); });
}

kinex_status kinex_gini(const double* values, size_t count, double* out) {
  KINEX_REQUIRE(out);
  if (count > 0) KINEX_REQUIRE(values);
  return guarded([&] { *out = kinex::gini(std::span<const double>(values, count)); });
}

kinex_status kinex_generating_function(const kinex_pmf* p, double x, double* out) {
  KINEX_REQUIRE(p);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = kinex::generating_function(p->value, x); });
}

kinex_status kinex_equilibrium_residual(double lambda, size_t K, double* out) {
  KINEX_REQUIRE(out);
  return guarded([&] { *out = kinex::equilibrium_residual(lambda, K); });
}

kinex_status kinex_meanfield_integrate(const kinex_pmf* p0, size_t K, double dt, double t_end,
                                       const double* snapshot_times, size_t snapshot_count, kinex_trajectory** out) {
  KINEX_REQUIRE(p0);
  KINEX_REQUIRE(out);
  if (snapshot_count > 0) KINEX_REQUIRE(snapshot_times);
  return guarded([&] {
    kinex::OdeConfig cfg;
    cfg.K = K;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.snapshot_times.assign(snapshot_times, snapshot_times + snapshot_count);
    *out = new kinex_trajectory{kinex::integrate(p0->value, cfg)};
  });
}

void kinex_trajectory_free(kinex_trajectory* t) { delete t; }

size_t kinex_trajectory_size(const kinex_trajectory* t) { return t ? t->value.size() : 0; }

kinex_status kinex_trajectory_time(const kinex_trajectory* t, size_t index, double* out) {
  KINEX_REQUIRE(t);
  KINEX_REQUIRE(out);
  return guarded([&] {
    if (index >= t->value.size()) kinex::fail(kinex::ErrorKind::parameter, "snapshot index out of range");
    *out = t->value.times[index];
  });
}

kinex_status kinex_trajectory_state(const kinex_trajectory* t, size_t index, kinex_pmf** out) {
  KINEX_REQUIRE(t);
  KINEX_REQUIRE(out);
  return guarded([&] {
    if (index >= t->value.size()) kinex::fail(kinex::ErrorKind::parameter, "snapshot index out of range");
    *out = new kinex_pmf{t->value.states[index]};
  });
}

kinex_status kinex_chain_build(uint32_t agents, uint32_t total, kinex_chain** out) {
  KINEX_REQUIRE(out);
  return guarded([&] { *out = new kinex_chain{kinex::build_chain(agents, total)}; });
}

void kinex_chain_free(kinex_chain* c) { delete c; }

size_t kinex_chain_states(const kinex_chain* c) { return c ? c->value.space.size() : 0; }

kinex_status kinex_chain_stationary(const kinex_chain* c, double* pi, size_t capacity, double* residual) {
  KINEX_REQUIRE(c);
  if (capacity > 0) KINEX_REQUIRE(pi);
  return guarded([&] {
    const kinex::StationaryResult r = kinex::stationary(c->value);
    std::copy_n(r.pi.begin(), std::min(capacity, r.pi.size()), pi);
    if (residual) *residual = r.residual;
  });
}

kinex_status kinex_chain_detailed_balance(const kinex_chain* c, double* out) {
  KINEX_REQUIRE(c);
  KINEX_REQUIRE(out);
  return guarded([&] { *out = kinex::detailed_balance_residual(c->value); });
}

kinex_status kinex_validate(const char* command, const char* config_json, char** violations_json) {
  KINEX_REQUIRE(command);
  KINEX_REQUIRE(config_json);
  KINEX_REQUIRE(violations_json);
  return guarded([&] {
    kinex::Json arr = kinex::Json::array();
    for (const auto& v : kinex::validate_config(command, parse_config(config_json)))
      arr.push_back({{"field", v.field}, {"constraint", v.constraint}, {"value", v.value}});
    *violations_json = duplicate(arr.dump(2));
  });
}

kinex_status kinex_resolve(const char* command, const char* config_json, char** resolved_json) {
  KINEX_REQUIRE(command);
  KINEX_REQUIRE(config_json);
  KINEX_REQUIRE(resolved_json);
  return guarded([&] { *resolved_json = duplicate(kinex::resolve_config(command, parse_config(config_json)).dump(2)); });
}

kinex_status kinex_run(const char* command, const char* config_json, const char* out_dir, int force,
                       char** manifest_json) {
  KINEX_REQUIRE(command);
  KINEX_REQUIRE(config_json);
  KINEX_REQUIRE(out_dir);
  return guarded([&] {
    const kinex::Json m = kinex::run_experiment(command, parse_config(config_json), out_dir, force != 0);
    if (manifest_json) *manifest_json = duplicate(m.dump(2));
  });
}

void kinex_string_free(char* s) { std::free(s); }

}  // extern "C"

#ifndef KINEX_H
#define KINEX_H

/* C interface to the kinex library. Objects are opaque handles released with
   the matching *_free function. Every call that can fail returns a
   kinex_status; the message for the last failure on the calling thread is
   available from kinex_last_error(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(KINEX_BUILDING_LIBRARY)
#define KINEX_API __declspec(dllexport)
#else
#define KINEX_API __declspec(dllimport)
#endif
#else
#define KINEX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kinex_status {
  KINEX_OK = 0,
  KINEX_E_PARAMETER = 1,
  KINEX_E_CONFIGURATION = 2,
  KINEX_E_PRECONDITION = 3,
  KINEX_E_TRUNCATION = 4,
  KINEX_E_UNRELIABLE_TAIL = 5,
  KINEX_E_NUMERICAL = 6,
  KINEX_E_SIZE = 7,
  KINEX_E_LOG_DOMAIN = 8,
  KINEX_E_UNDEFINED = 9,
  KINEX_E_IO = 10,
  KINEX_E_VALIDATION = 11,
  KINEX_E_NULL_ARGUMENT = 12,
  KINEX_E_INTERNAL = 13
} kinex_status;

typedef struct kinex_pmf kinex_pmf;
typedef struct kinex_trajectory kinex_trajectory;
typedef struct kinex_chain kinex_chain;

KINEX_API const char* kinex_version(void);
KINEX_API const char* kinex_status_name(kinex_status status);
/* Empty string when the last call on this thread succeeded. */
KINEX_API const char* kinex_last_error(void);

/* distributions */
KINEX_API kinex_status kinex_pmf_create(const double* weights, size_t count, double trunc_defect, kinex_pmf** out);
KINEX_API kinex_status kinex_pmf_dirac(size_t k, kinex_pmf** out);
KINEX_API kinex_status kinex_pmf_poisson(double lambda, size_t K, kinex_pmf** out);
KINEX_API kinex_status kinex_pmf_binomial(size_t n, double gamma, kinex_pmf** out);
/* "dirac:5", "poisson:5", "uniform:0:10", ... */
KINEX_API kinex_status kinex_pmf_parse(const char* text, kinex_pmf** out);
KINEX_API void kinex_pmf_free(kinex_pmf* p);

KINEX_API size_t kinex_pmf_size(const kinex_pmf* p);
KINEX_API double kinex_pmf_trunc_defect(const kinex_pmf* p);
/* Copies min(size, capacity) weights. */
KINEX_API kinex_status kinex_pmf_weights(const kinex_pmf* p, double* out, size_t capacity);
KINEX_API kinex_status kinex_pmf_moments(const kinex_pmf* p, double* mean, double* second_moment, double* variance);
KINEX_API kinex_status kinex_pmf_quantile(const kinex_pmf* p, double z, size_t* out);

KINEX_API kinex_status kinex_collision_gain(const kinex_pmf* p, const kinex_pmf* q, kinex_pmf** out);
KINEX_API kinex_status kinex_wasserstein(const kinex_pmf* p, const kinex_pmf* q, int order, double* out);
KINEX_API kinex_status kinex_total_variation(const kinex_pmf* p, const kinex_pmf* q, double* out);
KINEX_API kinex_status kinex_gini(const double* values, size_t count, double* out);
KINEX_API kinex_status kinex_generating_function(const kinex_pmf* p, double x, double* out);

/* mean-field ODE */
KINEX_API kinex_status kinex_equilibrium_residual(double lambda, size_t K, double* out);
/* snapshot_times may be NULL (count 0) for every grid point. */
KINEX_API kinex_status kinex_meanfield_integrate(const kinex_pmf* p0, size_t K, double dt, double t_end,
                                                 const double* snapshot_times, size_t snapshot_count,
                                                 kinex_trajectory** out);
KINEX_API void kinex_trajectory_free(kinex_trajectory* t);
KINEX_API size_t kinex_trajectory_size(const kinex_trajectory* t);
KINEX_API kinex_status kinex_trajectory_time(const kinex_trajectory* t, size_t index, double* out);
/* New handle holding a copy of snapshot `index`. */
KINEX_API kinex_status kinex_trajectory_state(const kinex_trajectory* t, size_t index, kinex_pmf** out);

/* exact chain */
KINEX_API kinex_status kinex_chain_build(uint32_t agents, uint32_t total, kinex_chain** out);
KINEX_API void kinex_chain_free(kinex_chain* c);
KINEX_API size_t kinex_chain_states(const kinex_chain* c);
/* Writes min(states, capacity) entries. residual may be NULL. */
KINEX_API kinex_status kinex_chain_stationary(const kinex_chain* c, double* pi, size_t capacity, double* residual);
KINEX_API kinex_status kinex_chain_detailed_balance(const kinex_chain* c, double* out);

/* experiments; returned strings are released with kinex_string_free */
/* JSON array of {field, constraint, value}; empty array when the config is runnable. */
KINEX_API kinex_status kinex_validate(const char* command, const char* config_json, char** violations_json);
/* Fully resolved config as JSON. */
KINEX_API kinex_status kinex_resolve(const char* command, const char* config_json, char** resolved_json);
/* Runs and writes artifacts plus manifest.json into out_dir; returns the manifest. */
KINEX_API kinex_status kinex_run(const char* command, const char* config_json, const char* out_dir, int force,
                                 char** manifest_json);
KINEX_API void kinex_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

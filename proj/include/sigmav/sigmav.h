#ifndef SIGMAV_H
#define SIGMAV_H

#include <stddef.h>
#include <stdint.h>

#if defined(SIGMAV_BUILDING_LIBRARY)
#define SIGMAV_API __attribute__((visibility("default")))
#else
#define SIGMAV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sigmav_status {
  SIGMAV_OK = 0,
  SIGMAV_ERR_CONTRACT = 1,       /* bad argument or violated precondition */
  SIGMAV_ERR_NEAR_CRITICAL = 2,  /* |grad V| below the floor */
  SIGMAV_ERR_NUMERICAL = 3,      /* an iteration failed to converge */
  SIGMAV_ERR_CONFIG = 4,         /* config text rejected */
  SIGMAV_ERR_INTERNAL = 5
} sigmav_status;

/// Message of the last failed call on this thread; never NULL.
SIGMAV_API const char* sigmav_last_error(void);
SIGMAV_API const char* sigmav_version(void);

/* ---- models ---- */

typedef struct sigmav_model sigmav_model;

typedef enum sigmav_model_kind {
  SIGMAV_HARMONIC = 0,
  SIGMAV_ROTATORS = 1,
  SIGMAV_FPU = 2,
  SIGMAV_PHI4 = 3,
  SIGMAV_LINEAR = 4
} sigmav_model_kind;

typedef struct sigmav_model_spec {
  int kind;       /* sigmav_model_kind */
  int dimension;  /* 1 or 2 */
  int sites;      /* sites per side */
  int periodic;   /* 0 fixed ends, 1 periodic */
  double lambda;  /* FPU */
  double r, u;    /* phi^4 */
  double slope;   /* linear */
} sigmav_model_spec;

SIGMAV_API sigmav_status sigmav_model_create(const sigmav_model_spec* spec, sigmav_model** out);
SIGMAV_API void sigmav_model_destroy(sigmav_model* model);
SIGMAV_API size_t sigmav_model_size(const sigmav_model* model);
SIGMAV_API sigmav_status sigmav_model_energy(const sigmav_model* model, const double* q, size_t n, double* out);
SIGMAV_API sigmav_status sigmav_model_gradient(const sigmav_model* model, const double* q, size_t n, double* out);
/// Row-major n*n dense Hessian.
SIGMAV_API sigmav_status sigmav_model_hessian(const sigmav_model* model, const double* q, size_t n, double* out);
SIGMAV_API sigmav_status sigmav_model_third_partial(const sigmav_model* model, const double* q, size_t n, int i, int j,
                                                    int k, double* out);

/* ---- geometry ---- */

typedef struct sigmav_geometry {
  double energy;
  double grad_norm;
  double laplacian;
  double alpha;
  double m1;
  double p, w, q;  /* flow derivatives of alpha, NaN above the requested order */
  double w_error, q_error;
} sigmav_geometry;

SIGMAV_API sigmav_status sigmav_geometry_eval(const sigmav_model* model, const double* q, size_t n, int order,
                                              sigmav_geometry* out);

/* ---- sampler ---- */

typedef struct sigmav_sampler_config {
  double v;
  double epsilon;  /* <= 0 selects the default width */
  double step_sigma;
  double tangent_sigma;
  double manifold_fraction;
  int64_t n_steps;
  int64_t burn_in;
  int thinning;
  int n_chains;
  uint64_t seed;
  int order;
  int threads;
} sigmav_sampler_config;

typedef struct sigmav_sample {
  int chain;
  int64_t step;
  double energy, grad_norm, alpha, p, w, q;
} sigmav_sample;

typedef struct sigmav_diagnostics {
  double acceptance_rate;
  double tau_alpha;
  double rhat_alpha;
  int64_t near_critical_events;
  double min_grad_norm;
} sigmav_diagnostics;

typedef struct sigmav_estimate {
  int order;
  double value;
  double error;
  int flagged;
} sigmav_estimate;

typedef struct sigmav_samples sigmav_samples;

SIGMAV_API void sigmav_sampler_defaults(sigmav_sampler_config* cfg);
SIGMAV_API sigmav_status sigmav_sample_level_set(const sigmav_model* model, const sigmav_sampler_config* cfg,
                                                 sigmav_samples** out);
SIGMAV_API void sigmav_samples_destroy(sigmav_samples* samples);
SIGMAV_API size_t sigmav_samples_count(const sigmav_samples* samples);
SIGMAV_API sigmav_status sigmav_samples_get(const sigmav_samples* samples, size_t i, sigmav_sample* out);
SIGMAV_API sigmav_status sigmav_samples_diagnostics(const sigmav_samples* samples, sigmav_diagnostics* out);
SIGMAV_API sigmav_status sigmav_samples_derivative(const sigmav_samples* samples, int k, sigmav_estimate* out);

/// Samples the level set at v = N vbar (cfg->v is ignored) and estimates d^k S / dvbar^k.
SIGMAV_API sigmav_status sigmav_entropy_derivative(const sigmav_model* model, double vbar, int k,
                                                   const sigmav_sampler_config* cfg, sigmav_estimate* out);

/* ---- critical points ---- */

typedef struct sigmav_critical_set sigmav_critical_set;

typedef struct sigmav_critical_point {
  double v;
  double vbar;
  int index;
  int degenerate;
  double min_abs_eigenvalue;
} sigmav_critical_point;

SIGMAV_API sigmav_status sigmav_find_critical_points(const sigmav_model* model, double vbar_lo, double vbar_hi,
                                                     int64_t random_seeds, uint64_t seed, int threads,
                                                     sigmav_critical_set** out);
SIGMAV_API void sigmav_critical_set_destroy(sigmav_critical_set* set);
SIGMAV_API size_t sigmav_critical_set_count(const sigmav_critical_set* set);
SIGMAV_API sigmav_status sigmav_critical_set_get(const sigmav_critical_set* set, size_t i, sigmav_critical_point* out);
/// Coordinates of point i; buffer of sigmav_model_size entries.
SIGMAV_API sigmav_status sigmav_critical_set_coords(const sigmav_critical_set* set, size_t i, double* out, size_t n);
SIGMAV_API sigmav_status sigmav_critical_set_euler(const sigmav_critical_set* set, double v_limit, long long* out);

/* ---- thermodynamics ---- */

SIGMAV_API sigmav_status sigmav_helmholtz(double f, double beta, double* out);

/* ---- runs ---- */

/// Validates config text. has_seed != 0 supplies a seed that overrides the text.
SIGMAV_API sigmav_status sigmav_config_check(const char* text, int has_seed);
/// Parses config text and runs the experiment into out_dir (NULL or "" uses
/// the config's output key). threads < 0 keeps the config value. exit_code
/// receives 0, 1 or 2; the returned status reports only whether the config
/// could be parsed and the run started.
SIGMAV_API sigmav_status sigmav_run_config_text(const char* text, const char* out_dir, int threads, int has_seed,
                                                uint64_t seed, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif

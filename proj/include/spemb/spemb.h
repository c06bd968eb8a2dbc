#ifndef SPEMB_H
#define SPEMB_H

#include <stddef.h>
#include <stdint.h>

#ifndef SPEMB_API
#define SPEMB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spemb_status {
  SPEMB_OK = 0,
  SPEMB_ERR_CONFIG = 1,
  SPEMB_ERR_DATA = 2,
  SPEMB_ERR_RESOLUTION = 3,
  SPEMB_ERR_UNSUPPORTED = 4,
  SPEMB_ERR_DOMAIN = 5,
  SPEMB_ERR_IO = 6,
  SPEMB_ERR_INTERNAL = 7,
  SPEMB_ERR_ARGUMENT = 8
} spemb_status;

typedef struct spemb_manifold spemb_manifold;
typedef struct spemb_symbol spemb_symbol;
typedef struct spemb_coeffs spemb_coeffs;
typedef struct spemb_config spemb_config;

SPEMB_API const char* spemb_version(void);
/* Message of the last failed call on this thread; empty after success. */
SPEMB_API const char* spemb_last_error(void);
SPEMB_API const char* spemb_status_name(spemb_status status);
/* 0 selects the hardware concurrency. */
SPEMB_API void spemb_set_jobs(unsigned jobs);

/* Manifolds: "circle", "torus2", "sphere-zonal". */
SPEMB_API spemb_status spemb_manifold_create(const char* name, spemb_manifold** out);
SPEMB_API void spemb_manifold_destroy(spemb_manifold* m);
SPEMB_API spemb_status spemb_manifold_dim(const spemb_manifold* m, int* out);
SPEMB_API spemb_status spemb_manifold_eigenvalue(const spemb_manifold* m, size_t n, double* out);
SPEMB_API spemb_status spemb_manifold_modes_below(const spemb_manifold* m, double lambda, size_t* out);
SPEMB_API spemb_status spemb_weyl_count(const spemb_manifold* m, double lambda, int64_t* out);
SPEMB_API spemb_status spemb_weyl_asymptotic(const spemb_manifold* m, double lambda, double* out);

/* Symbols F on [0, inf). */
SPEMB_API spemb_status spemb_symbol_plateau(double t, int exponent, double end_ratio, spemb_symbol** out);
SPEMB_API spemb_status spemb_symbol_heat(spemb_symbol** out);
SPEMB_API spemb_status spemb_symbol_taylor(int order, spemb_symbol** out);
SPEMB_API spemb_status spemb_symbol_zero(spemb_symbol** out);
SPEMB_API void spemb_symbol_destroy(spemb_symbol* s);
SPEMB_API spemb_status spemb_symbol_evaluate(const spemb_symbol* s, double x, double* out);
SPEMB_API spemb_status spemb_symbol_derivative(const spemb_symbol* s, int order, double x, double* out);

/* Coefficients. spec_json describes one catalog entry, e.g. {"name": "delta", "x0": 0}. */
SPEMB_API spemb_status spemb_catalog(const spemb_manifold* m, const char* spec_json, size_t cutoff,
                                     spemb_coeffs** out);
SPEMB_API spemb_status spemb_apply_symbol(const spemb_symbol* s, double eps, const spemb_coeffs* u,
                                          spemb_coeffs** out);
SPEMB_API void spemb_coeffs_destroy(spemb_coeffs* c);
SPEMB_API spemb_status spemb_coeffs_size(const spemb_coeffs* c, size_t* out);
SPEMB_API spemb_status spemb_coeffs_get(const spemb_coeffs* c, size_t n, double* re, double* im);
SPEMB_API spemb_status spemb_sobolev_norm(const spemb_coeffs* c, double j, double* out);

/* Experiments. Keys for spemb_config_set: output, seed, grid (hi:lo:count), battery (e.g. H0-8,C0-4). */
SPEMB_API spemb_status spemb_config_load(const char* path, spemb_config** out);
SPEMB_API spemb_status spemb_config_parse(const char* text, int is_json, spemb_config** out);
SPEMB_API spemb_status spemb_config_set(spemb_config* cfg, const char* key, const char* value);
/* Writes the 16 hex digits and a terminating NUL; buf must hold 17 bytes. */
SPEMB_API spemb_status spemb_config_hash(const spemb_config* cfg, char* buf, size_t len);
SPEMB_API void spemb_config_destroy(spemb_config* cfg);

/* verb: spectrum | embed | verify. property and expect_fail may be NULL.
   exit_code receives 0 on pass and 1 on property failure. */
SPEMB_API spemb_status spemb_run(const spemb_config* cfg, const char* verb, const char* property,
                                 const char* expect_fail, int* exit_code);
SPEMB_API spemb_status spemb_report(const char* dir, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif

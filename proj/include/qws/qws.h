/* SPDX-License-Identifier: Apache-2.0 */
#ifndef QWS_QWS_H
#define QWS_QWS_H

/* C interface to the qws library. Every function returns a qws_status; on
 * failure qws_last_error() holds a message for the calling thread. Handles are
 * opaque and must be released with the matching *_destroy function. */

#include <stddef.h>

#if defined(_WIN32)
#  define QWS_API __declspec(dllexport)
#else
#  define QWS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qws_status {
  QWS_OK = 0,
  QWS_ERR_INVALID_ARGUMENT = 1,
  QWS_ERR_RANGE = 2,
  QWS_ERR_NUMERIC = 3,
  QWS_ERR_DEGENERATE_COUPLING = 4,
  QWS_ERR_NODE_AT_CUTOFF = 5,
  QWS_ERR_NEAR_THRESHOLD = 6,
  QWS_ERR_AMBIGUOUS_CROSSING = 7,
  QWS_ERR_CONFIG = 8,
  QWS_ERR_IO = 9,
  QWS_ERR_INTERNAL = 10
} qws_status;

typedef struct qws_model qws_model;
typedef struct qws_config qws_config;

QWS_API const char* qws_version(void);
QWS_API const char* qws_status_name(qws_status s);
QWS_API const char* qws_last_error(void);

/* special functions */
QWS_API qws_status qws_gamma(double x, double* value);
/* kind: 'j', 'y', 'i' or 'k'. Any output pointer may be NULL. */
QWS_API qws_status qws_bessel(char kind, double nu, double x, double* value, double* derivative,
                              double* est_error);
QWS_API qws_status qws_log_derivative_exterior(double lambda, double kappa, double r0, double* value);

/* models: family is "none", "square_well", "exponential" or "gaussian" */
QWS_API qws_status qws_model_create(double r0, const char* family, double depth, double range,
                                    qws_model** out);
/* profile "gaussian_bump": p1 = center, p2 = width; "polynomial_bump": p1 = a, p2 = b.
 * Coupling is set afterwards with qws_model_set_coupling. */
QWS_API qws_status qws_model_add_kernel(qws_model* m, const char* profile, double p1, double p2,
                                        double lo, double hi);
/* rank x rank symmetric matrix, row-major */
QWS_API qws_status qws_model_set_coupling(qws_model* m, const double* coupling, size_t rank);
QWS_API qws_status qws_model_from_config(const qws_config* c, qws_model** out);
QWS_API void qws_model_destroy(qws_model* m);

QWS_API qws_status qws_phase_shift(const qws_model* m, double q, double l, double k, double mu,
                                   double* eta, double* eta_raw);
/* Writes up to capacity energies in increasing order; *count is the total found. */
QWS_API qws_status qws_bound_states(const qws_model* m, double q, double l, double mu, double* energies,
                                    size_t capacity, size_t* count);

typedef enum qws_levinson_status {
  QWS_LEVINSON_PASS = 0,
  QWS_LEVINSON_FAIL = 1,
  QWS_LEVINSON_INCONCLUSIVE = 2
} qws_levinson_status;

typedef struct qws_levinson_result {
  double eta0;
  int n_direct;
  int n_continuation;
  qws_levinson_status status;
} qws_levinson_result;

QWS_API qws_status qws_levinson(const qws_model* m, double q, double l, double mu, double tol_eta,
                                qws_levinson_result* out);

/* configurations */
/* Parse errors do not fail the call: inspect the diagnostics. */
QWS_API qws_status qws_config_load(const char* path, qws_config** out);
QWS_API qws_status qws_config_parse(const char* text, const char* source_dir, qws_config** out);
QWS_API void qws_config_destroy(qws_config* c);
QWS_API size_t qws_config_diagnostic_count(const qws_config* c);
QWS_API const char* qws_config_diagnostic(const qws_config* c, size_t i);
QWS_API const char* qws_config_task(const qws_config* c);
/* NULL path or format leaves the value unchanged; metadata < 0 leaves it unchanged. */
QWS_API qws_status qws_config_set_output(qws_config* c, const char* path, const char* format, int metadata);
/* Runs the task and writes its artifacts. Returns the process exit status
 * (0 ok, 1 verification failed, 2 config, 3 numeric, 4 inconclusive). */
QWS_API int qws_config_run(const qws_config* c, unsigned threads);
/* Status line of the last qws_config_run on this thread. */
QWS_API const char* qws_last_run_trailer(void);

#ifdef __cplusplus
}
#endif

#endif

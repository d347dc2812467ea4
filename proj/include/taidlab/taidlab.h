/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The taidlab Authors */

/*
 * C interface to taidlab. Every fallible call returns a taidlab_status; on
 * failure a message for the calling thread is available from
 * taidlab_last_error() until the next failing call on that thread. Handles are
 * opaque and released with their matching *_destroy function, which accepts
 * NULL.
 */
#ifndef TAIDLAB_TAIDLAB_H_
#define TAIDLAB_TAIDLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TAIDLAB_BUILDING_LIBRARY)
#define TAIDLAB_API __attribute__((visibility("default")))
#else
#define TAIDLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum taidlab_status {
  TAIDLAB_OK = 0,
  TAIDLAB_ERR_INVALID_INPUT = 1,
  TAIDLAB_ERR_DIMENSION = 2,
  TAIDLAB_ERR_INVALID_PARAMETER = 3,
  TAIDLAB_ERR_RANGE = 4,
  TAIDLAB_ERR_INVALID_KERNEL = 5,
  TAIDLAB_ERR_CONFIG = 6,
  TAIDLAB_ERR_RUN_FAILED = 7,
  TAIDLAB_ERR_IO = 8,
  TAIDLAB_ERR_NULL_ARGUMENT = 9,
  TAIDLAB_ERR_INTERNAL = 10
} taidlab_status;

TAIDLAB_API const char* taidlab_version(void);
TAIDLAB_API const char* taidlab_status_name(taidlab_status status);
TAIDLAB_API const char* taidlab_last_error(void);

/* ---- Distributions -------------------------------------------------------- */

/* out receives n values; n >= 2 and every logit finite. */
TAIDLAB_API taidlab_status taidlab_softmax(const double* logits, size_t n, double* out);
TAIDLAB_API taidlab_status taidlab_log_softmax(const double* logits, size_t n, double* out);
/* softmax((1 - t) * student + t * teacher), t in [0, 1]. */
TAIDLAB_API taidlab_status taidlab_interpolate(const double* student, const double* teacher,
                                               size_t n, double t, double* out);

/* ---- Objectives ----------------------------------------------------------- */

typedef enum taidlab_objective {
  TAIDLAB_OBJECTIVE_KL = 0,
  TAIDLAB_OBJECTIVE_RKL = 1,
  TAIDLAB_OBJECTIVE_TVD = 2,
  TAIDLAB_OBJECTIVE_GJSD = 3,
  TAIDLAB_OBJECTIVE_SKL = 4,
  TAIDLAB_OBJECTIVE_SRKL = 5,
  TAIDLAB_OBJECTIVE_TAID = 6
} taidlab_objective;

TAIDLAB_API taidlab_status taidlab_objective_parse(const char* name, taidlab_objective* out);
TAIDLAB_API const char* taidlab_objective_name(taidlab_objective objective);

/*
 * Mean objective over `rows` positions of row-major rows x vocab logits.
 * `param` is the mixture weight for GJSD/SKL/SRKL and t for TAID; it is
 * ignored otherwise. `grad` (rows x vocab, may be NULL) receives the gradient
 * with respect to the student logits.
 */
TAIDLAB_API taidlab_status taidlab_objective_eval(taidlab_objective objective,
                                                  const double* student, const double* teacher,
                                                  size_t rows, size_t vocab, double param,
                                                  double* value, double* grad);

/* ---- Interpolation schedule ----------------------------------------------- */

typedef struct taidlab_scheduler_config {
  double alpha;
  double beta;
  double t_start;
  double t_end;
  double epsilon;
  int64_t total_steps;
  int adaptive;
} taidlab_scheduler_config;

typedef struct taidlab_scheduler taidlab_scheduler;

TAIDLAB_API void taidlab_scheduler_config_init(taidlab_scheduler_config* config);
TAIDLAB_API taidlab_status taidlab_linear_t(const taidlab_scheduler_config* config, int64_t n,
                                            double* out);
TAIDLAB_API taidlab_status taidlab_scheduler_create(const taidlab_scheduler_config* config,
                                                    taidlab_scheduler** out);
/* Feeds the objective of the step just taken; *t_out (may be NULL) gets the new t. */
TAIDLAB_API taidlab_status taidlab_scheduler_step(taidlab_scheduler* scheduler, double objective,
                                                  double* t_out);
TAIDLAB_API taidlab_status taidlab_scheduler_t(const taidlab_scheduler* scheduler, double* out);
TAIDLAB_API taidlab_status taidlab_scheduler_momentum(const taidlab_scheduler* scheduler,
                                                      double* out);
TAIDLAB_API void taidlab_scheduler_destroy(taidlab_scheduler* scheduler);

/* ---- Regression recursion ------------------------------------------------- */

typedef enum taidlab_sim_mode { TAIDLAB_SIM_TAID = 0, TAIDLAB_SIM_SELF_DISTILL = 1 } taidlab_sim_mode;
typedef enum taidlab_alpha_mode {
  TAIDLAB_ALPHA_D_MIN = 0,
  TAIDLAB_ALPHA_D_MAX = 1,
  TAIDLAB_ALPHA_FIXED = 2
} taidlab_alpha_mode;

typedef struct taidlab_spectrum taidlab_spectrum;
typedef struct taidlab_trace taidlab_trace;

typedef struct taidlab_sim_config {
  double epsilon;
  int horizon;
  taidlab_sim_mode mode;
  taidlab_alpha_mode alpha_mode;
  double alpha; /* TAIDLAB_ALPHA_FIXED only */
  int continue_after_collapse;
} taidlab_sim_config;

typedef struct taidlab_sim_step {
  int step;
  double lambda; /* NaN on a collapsed step */
  double r;
  double norm_y;
  double norm_y_tilde;
  double min_filter;
  double max_filter;
  int collapsed;
} taidlab_sim_step;

TAIDLAB_API void taidlab_sim_config_init(taidlab_sim_config* config);
/* Decomposes a symmetric positive definite n x n row-major Gram matrix. */
TAIDLAB_API taidlab_status taidlab_spectrum_create(const double* gram, size_t n,
                                                   taidlab_spectrum** out);
TAIDLAB_API size_t taidlab_spectrum_size(const taidlab_spectrum* spectrum);
/* Ascending eigenvalues into out[0..n). */
TAIDLAB_API taidlab_status taidlab_spectrum_eigenvalues(const taidlab_spectrum* spectrum,
                                                        double* out);
TAIDLAB_API taidlab_status taidlab_spectrum_kappa(const taidlab_spectrum* spectrum, double* out);
TAIDLAB_API void taidlab_spectrum_destroy(taidlab_spectrum* spectrum);

TAIDLAB_API taidlab_status taidlab_run_recursion(const taidlab_spectrum* spectrum,
                                                 const double* y0, size_t n,
                                                 const taidlab_sim_config* config,
                                                 taidlab_trace** out);
TAIDLAB_API size_t taidlab_trace_length(const taidlab_trace* trace);
TAIDLAB_API taidlab_status taidlab_trace_step(const taidlab_trace* trace, size_t index,
                                              taidlab_sim_step* out);
/* y entering step `index` (n values); index == length gives the final y. */
TAIDLAB_API taidlab_status taidlab_trace_y(const taidlab_trace* trace, size_t index, double* out);
TAIDLAB_API taidlab_status taidlab_trace_r0(const taidlab_trace* trace, double* out);
/* First collapsed step, or -1 when none. */
TAIDLAB_API int taidlab_trace_first_collapse(const taidlab_trace* trace);
TAIDLAB_API void taidlab_trace_destroy(taidlab_trace* trace);

TAIDLAB_API taidlab_status taidlab_self_distill_safe_steps(double r0, double kappa, double* out);
TAIDLAB_API taidlab_status taidlab_corollary_initial_norm(int horizon, double kappa, int n,
                                                          double epsilon, double* out);

/* ---- Analysis ------------------------------------------------------------- */

TAIDLAB_API taidlab_status taidlab_mass_report(const double* student, const double* teacher,
                                               size_t vocab, size_t head_k, double tail_lo_pct,
                                               double tail_hi_pct, double* head_mass,
                                               double* tail_mass);
TAIDLAB_API taidlab_status taidlab_dist_stats(const double* dist, size_t vocab,
                                              size_t target_index, double* entropy,
                                              double* target_prob);

/* ---- Experiments ---------------------------------------------------------- */

typedef enum taidlab_run_mode {
  TAIDLAB_RUN_DISTILL = 0,
  TAIDLAB_RUN_SWEEP = 1,
  TAIDLAB_RUN_THEORY = 2
} taidlab_run_mode;

typedef struct taidlab_run_options {
  taidlab_run_mode mode;
  const char* out_dir; /* NULL: output.dir from the config */
  int has_seed;
  uint64_t seed;
  int quiet;
  unsigned threads; /* 0: TAIDLAB_THREADS, then hardware concurrency */
} taidlab_run_options;

typedef struct taidlab_run_result {
  int exit_code; /* 0 ok, 2 config error, 3 run failure */
  size_t runs;
  size_t failed;
  char out_dir[1024];
  char message[1024];
} taidlab_run_result;

TAIDLAB_API void taidlab_run_options_init(taidlab_run_options* options);
/* Returns the exit code also stored in result->exit_code. */
TAIDLAB_API int taidlab_run_experiment(const char* config_path, const taidlab_run_options* options,
                                       taidlab_run_result* result);

typedef struct taidlab_analyze_options {
  const char* student_path;
  const char* teacher_path;
  const char* corpus_path;
  const char* out_dir;
  size_t head_k;
  double tail_lo_pct;
  double tail_hi_pct;
} taidlab_analyze_options;

TAIDLAB_API void taidlab_analyze_options_init(taidlab_analyze_options* options);
TAIDLAB_API taidlab_status taidlab_analyze(const taidlab_analyze_options* options);

/* kind is one of T_TRACE, LOSS_VARIANCE, CAPACITY_CURVE, MASS_BARS. Writes
 * <stem>.svg and <stem>.py into out_dir. */
TAIDLAB_API taidlab_status taidlab_plot(const char* kind, const char* const* csv_paths,
                                        size_t n_paths, const char* out_dir, const char* stem);

#ifdef __cplusplus
}
#endif

#endif /* TAIDLAB_TAIDLAB_H_ */

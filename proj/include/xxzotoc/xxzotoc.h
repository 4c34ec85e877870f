#ifndef XXZOTOC_XXZOTOC_H
#define XXZOTOC_XXZOTOC_H

/*
 * C interface to the XXZ-chain OTOC library.
 *
 * Every function returns an xxz_status. On failure the message of the most
 * recent error on the calling thread is available from xxz_last_error().
 * Handles are opaque, immutable after creation, and may be shared across
 * threads for reading.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(XXZOTOC_BUILDING)
#    define XXZ_API __declspec(dllexport)
#  else
#    define XXZ_API __declspec(dllimport)
#  endif
#else
#  define XXZ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xxz_status {
  XXZ_OK = 0,
  XXZ_ERR_DOMAIN = 1,     /* invalid argument or precondition */
  XXZ_ERR_CAPACITY = 2,   /* chain above the dense-size cap */
  XXZ_ERR_NUMERIC = 3,    /* eigensolver, BLAS or sweep breakdown */
  XXZ_ERR_RESOURCE = 4,   /* work budget exceeded */
  XXZ_ERR_NOT_FOUND = 5,  /* no threshold crossing */
  XXZ_ERR_FIT = 6,        /* degenerate fit data */
  XXZ_ERR_IO = 7,
  XXZ_ERR_NULL = 8,       /* null pointer argument */
  XXZ_ERR_BUFFER = 9,     /* output buffer too small */
  XXZ_ERR_INTERNAL = 10
} xxz_status;

typedef enum xxz_boundary { XXZ_BOUNDARY_DEFAULT = -1, XXZ_OPEN = 0, XXZ_PERIODIC = 1 } xxz_boundary;
typedef enum xxz_pauli { XXZ_SIGMA_X = 0, XXZ_SIGMA_Y = 1, XXZ_SIGMA_Z = 2 } xxz_pauli;
typedef enum xxz_tolerance_mode { XXZ_TOL_RELATIVE = 0, XXZ_TOL_ABSOLUTE = 1, XXZ_TOL_WINDOW = 2 } xxz_tolerance_mode;
typedef enum xxz_initial_kind { XXZ_INIT_GROUND = 0, XXZ_INIT_GROUND_MEMBER = 1, XXZ_INIT_HAAR = 2 } xxz_initial_kind;
typedef enum xxz_crossing { XXZ_CROSS_ANY = 0, XXZ_CROSS_RISING = 1, XXZ_CROSS_FALLING = 2 } xxz_crossing;
typedef enum xxz_verdict { XXZ_ORDERED_LIKE = 0, XXZ_DISORDERED_LIKE = 1, XXZ_INCONCLUSIVE = 2 } xxz_verdict;

typedef struct xxz_complex {
  double re;
  double im;
} xxz_complex;

typedef struct xxz_chain_params {
  int n_sites;
  double jz_over_j;
  double h_over_j;
  int boundary;   /* xxz_boundary; DEFAULT: periodic for even N, open for odd N */
  int max_sites;  /* dense cap; <= 0 selects the default of 14 */
} xxz_chain_params;

typedef struct xxz_tolerance {
  int mode;      /* xxz_tolerance_mode */
  double value;  /* fraction of the spectral width, absolute energy, or window T */
} xxz_tolerance;

typedef struct xxz_otoc_params {
  int w_kind;  /* xxz_pauli */
  int w_site;  /* < 0: bulk site floor(N/2) */
  int v_kind;
  int v_site;
  int initial_kind;  /* xxz_initial_kind */
  size_t member;     /* ground-set position for XXZ_INIT_GROUND_MEMBER */
  uint64_t seed;     /* XXZ_INIT_HAAR */
  double t_max;
  size_t n_samples;
  double window;     /* averaging window T, at most t_max */
  int term_iv_scan;  /* nonzero: evaluate accidental resonances */
  size_t quadruple_budget;
} xxz_otoc_params;

typedef struct xxz_level {
  size_t index;
  double energy;
  int magnetization;
  size_t theta; /* 1-based degenerate-set label, 1 = ground set */
} xxz_level;

typedef struct xxz_otoc_summary {
  xxz_complex f_saturation;
  xxz_complex f_gs;  /* NaN when the initial state is outside the ground set */
  xxz_complex f_ex;
  xxz_complex term_pair_ab;
  xxz_complex term_pair_ag;
  xxz_complex term_all_equal;
  xxz_complex term_accidental;
  int has_average;
  xxz_complex f_time_average;
  double re_min;
  double re_max;
  double tolerance;
  size_t ground_set_size;
  long long initial_eigenindex; /* -1 when the initial state is not an eigenstate */
  int initial_magnetization;
  int w_site;
  int v_site;
  size_t quadruples;
} xxz_otoc_summary;

typedef struct xxz_diagnostics {
  double intra_ground_max;
  double cross_set_max;
  double pr_ground;
  double fluct;
  double tau; /* +inf when the ground level is degenerate within tolerance */
  int verdict; /* xxz_verdict */
} xxz_diagnostics;

typedef struct xxz_sweep_params {
  const double* jz_values;
  size_t n_jz;
  const double* h_values;
  size_t n_h;
  const int* n_sites;
  size_t n_n;
  int boundary;  /* xxz_boundary */
  int op;        /* xxz_pauli */
  int site;      /* < 0: bulk */
  xxz_tolerance tolerance;
  int term_iv_scan;
  size_t quadruple_budget;
  int max_sites;
  unsigned workers; /* 0: XXZOTOC_WORKERS or hardware concurrency */
} xxz_sweep_params;

typedef struct xxz_sweep_record {
  double jz_over_j;
  double h_over_j;
  int n_sites;
  int boundary;
  int op;
  int site;
  int ok;
  xxz_complex f_saturation; /* NaN for failed points */
  xxz_complex f_gs;
  xxz_complex f_ex;
  double tolerance;
  size_t ground_set_size;
} xxz_sweep_record;

typedef struct xxz_fit {
  double a;
  double xi;
  double jz_inf;
  double residual;
  int iterations;
} xxz_fit;

typedef struct xxz_haar_estimate {
  xxz_complex mean;
  double standard_error;
  size_t n_samples;
} xxz_haar_estimate;

typedef struct xxz_chain xxz_chain;
typedef struct xxz_otoc_result xxz_otoc_result;
typedef struct xxz_sweep xxz_sweep;

XXZ_API const char* xxz_version(void);
XXZ_API const char* xxz_status_string(xxz_status status);
/* Message of the last failed call on this thread; empty if none. */
XXZ_API const char* xxz_last_error(void);

/* Checks the linked BLAS on a product large enough to reach its blocked kernels. */
XXZ_API xxz_status xxz_backend_check(void);

XXZ_API void xxz_chain_params_default(xxz_chain_params* params);
XXZ_API void xxz_tolerance_default(xxz_tolerance* tolerance);
/* W = V = sigma_z on the bulk site, ground-state start, t in [0, 20], T = 20. */
XXZ_API void xxz_otoc_params_default(xxz_otoc_params* params);
XXZ_API void xxz_sweep_params_default(xxz_sweep_params* params);

/* Diagonalizes the chain sector by sector. */
XXZ_API xxz_status xxz_chain_solve(const xxz_chain_params* params, const xxz_tolerance* tolerance,
                                   xxz_chain** out);
XXZ_API void xxz_chain_free(xxz_chain* chain);
XXZ_API xxz_status xxz_chain_info(const xxz_chain* chain, xxz_chain_params* params, size_t* dimension,
                                  size_t* set_count, size_t* ground_set_size, double* tolerance);
/* Copies min(dimension, capacity) levels; XXZ_ERR_BUFFER if capacity < dimension. */
XXZ_API xxz_status xxz_chain_levels(const xxz_chain* chain, xxz_level* levels, size_t capacity);

/* Saturation report; with_series also samples F(t) on the time grid and averages it. */
XXZ_API xxz_status xxz_otoc_run(const xxz_chain* chain, const xxz_otoc_params* params, int with_series,
                                xxz_otoc_result** out);
XXZ_API void xxz_otoc_result_free(xxz_otoc_result* result);
XXZ_API xxz_status xxz_otoc_result_summary(const xxz_otoc_result* result, xxz_otoc_summary* summary);
XXZ_API size_t xxz_otoc_result_series_length(const xxz_otoc_result* result);
XXZ_API xxz_status xxz_otoc_result_series(const xxz_otoc_result* result, double* times, xxz_complex* values,
                                          size_t capacity);

/* Trapezoidal (1/T) int_0^T F dt over sampled data. */
XXZ_API xxz_status xxz_time_average(const double* times, const xxz_complex* values, size_t n, double window,
                                    xxz_complex* mean, double* re_min, double* re_max);

XXZ_API xxz_status xxz_diagnose(const xxz_chain* chain, int op, int site, xxz_diagnostics* out);

XXZ_API xxz_status xxz_haar_infinite_temperature(const xxz_chain* chain, const xxz_otoc_params* params,
                                                 size_t n_samples, xxz_haar_estimate* out);

XXZ_API xxz_status xxz_sweep_run(const xxz_sweep_params* params, xxz_sweep** out);
XXZ_API void xxz_sweep_free(xxz_sweep* sweep);
XXZ_API size_t xxz_sweep_size(const xxz_sweep* sweep);
XXZ_API size_t xxz_sweep_failures(const xxz_sweep* sweep);
XXZ_API xxz_status xxz_sweep_record_at(const xxz_sweep* sweep, size_t index, xxz_sweep_record* record);
/* Error text of a failed record; empty for successful ones. */
XXZ_API const char* xxz_sweep_record_error(const xxz_sweep* sweep, size_t index);

XXZ_API xxz_status xxz_critical_point(const double* x, const double* y, size_t n, double threshold,
                                      int direction, double* out);
XXZ_API xxz_status xxz_fit_power_law(const double* n_values, const double* jz_c, size_t count, xxz_fit* out);

#ifdef __cplusplus
}
#endif

#endif

/* C interface to the tess subpopulation scanner.
 *
 * Every function returns a tess_status. On failure the message of the most
 * recent error on the calling thread is available from tess_last_error().
 * Handles are opaque and owned by the caller once created; free them with the
 * matching *_free function. Strings returned by accessors stay valid until
 * the owning handle is freed. */
#ifndef TESS_TESS_H
#define TESS_TESS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TESS_BUILDING_LIBRARY)
#    define TESS_API __declspec(dllexport)
#  else
#    define TESS_API __declspec(dllimport)
#  endif
#else
#  define TESS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tess_status {
  TESS_OK = 0,
  TESS_ERR_INVALID = 1,    /* bad argument or option value */
  TESS_ERR_IO = 2,         /* file could not be read or written */
  TESS_ERR_PARSE = 3,      /* malformed CSV or report */
  TESS_ERR_DEGENERATE = 4, /* data admits no scan, e.g. no treated unit with controls */
  TESS_ERR_LIMIT = 5,      /* brute-force oracle above its size cap */
  TESS_ERR_INTERNAL = 6
} tess_status;

typedef enum tess_score_kind {
  TESS_SCORE_BJ = 0,
  TESS_SCORE_NA = 1,
  TESS_SCORE_KS = 2,
  TESS_SCORE_CVM = 3,
  TESS_SCORE_HC = 4,
  TESS_SCORE_AD = 5
} tess_score_kind;

typedef enum tess_sidedness {
  TESS_SIDED_UPPER = 0,
  TESS_SIDED_LOWER = 1,
  TESS_SIDED_TWO = 2
} tess_sidedness;

typedef struct tess_dataset tess_dataset;
typedef struct tess_options tess_options;
typedef struct tess_report tess_report;

TESS_API const char* tess_version(void);
TESS_API const char* tess_status_string(tess_status status);
/* Message of the last failure on this thread, "" if none. */
TESS_API const char* tess_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

/* covariates: comma-separated column names, or NULL/"" for every other column. */
TESS_API tess_status tess_dataset_load_csv(const char* path, const char* outcome,
                                           const char* treatment, const char* covariates,
                                           tess_dataset** out);
/* Row-major covariate codes x[i * dims + j] in [0, arities[j]). treated[i] is 0 or 1. */
TESS_API tess_status tess_dataset_from_arrays(size_t records, size_t dims, const double* outcome,
                                              const int* treated, const uint32_t* x,
                                              const size_t* arities, tess_dataset** out);
TESS_API tess_status tess_dataset_counts(const tess_dataset* ds, size_t* records, size_t* dims);
TESS_API void tess_dataset_free(tess_dataset* ds);

/* ---- options ----------------------------------------------------------- */

TESS_API tess_status tess_options_create(tess_options** out);
/* Keys are the CLI flag names without the leading dashes, e.g. "alpha-min". */
TESS_API tess_status tess_options_set(tess_options* opts, const char* key, const char* value);
/* Writes the current value into buf (NUL terminated); *needed gets the full length + 1. */
TESS_API tess_status tess_options_get(const tess_options* opts, const char* key, char* buf,
                                      size_t buf_size, size_t* needed);
TESS_API void tess_options_free(tess_options* opts);

/* ---- runs -------------------------------------------------------------- */

/* command: scan, permtest, simulate, power, holdout, oracle-check, theory.
 * ds may be NULL, in which case commands that need data read option "input". */
TESS_API tess_status tess_run(const char* command, const tess_options* opts,
                              const tess_dataset* ds, tess_report** out);

TESS_API const char* tess_report_json(const tess_report* r);
TESS_API const char* tess_report_summary(const tess_report* r);
TESS_API double tess_report_wall_seconds(const tess_report* r);
/* TESS_ERR_INVALID when the report has no scan section. */
TESS_API tess_status tess_report_scan(const tess_report* r, double* score, double* alpha,
                                      double* n_alpha, double* n_total);
/* TESS_ERR_INVALID when the report has no permutation section. */
TESS_API tess_status tess_report_p_value(const tess_report* r, double* p_value);
TESS_API void tess_report_free(tess_report* r);

/* ---- pure functions ---------------------------------------------------- */

TESS_API tess_status tess_p_value_range(const double* controls, size_t n_controls, double y,
                                        tess_sidedness sided, double* p_min, double* p_max);
TESS_API tess_status tess_significance_mass(double p_min, double p_max, double alpha,
                                            double* out);
TESS_API tess_status tess_score(tess_score_kind kind, int symmetric, double n_alpha,
                                double n_total, double alpha, double* out);
TESS_API tess_status tess_theory_constant(double* c, double* argmax_z);
TESS_API tess_status tess_critical_value(size_t cells, double epsilon, double* out);

#ifdef __cplusplus
}
#endif

#endif /* TESS_TESS_H */

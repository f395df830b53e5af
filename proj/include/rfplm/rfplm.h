/*
 * C interface to the robust semi-functional linear regression library.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function. Every fallible call returns an rfplm_status; on
 * failure rfplm_last_error() describes the problem (per thread, valid until
 * the next failing call on that thread). Strings returned through char**
 * out-parameters are owned by the caller and released with rfplm_string_free.
 */
#ifndef RFPLM_RFPLM_H
#define RFPLM_RFPLM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef RFPLM_BUILDING_LIBRARY
#    define RFPLM_API __declspec(dllexport)
#  else
#    define RFPLM_API __declspec(dllimport)
#  endif
#else
#  define RFPLM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rfplm_status {
  RFPLM_OK = 0,
  RFPLM_ERR_INVALID_ARGUMENT = 1,
  RFPLM_ERR_INVALID_DIMENSION = 2,
  RFPLM_ERR_DOMAIN = 3,
  RFPLM_ERR_DEGENERATE_SCALE = 4,
  RFPLM_ERR_SINGULAR_DESIGN = 5,
  RFPLM_ERR_FLAT_OBJECTIVE = 6,
  RFPLM_ERR_INSUFFICIENT_DATA = 7,
  RFPLM_ERR_SELECTION_FAILED = 8,
  RFPLM_ERR_PARSE = 9,
  RFPLM_ERR_IO = 10,
  RFPLM_ERR_DEGENERATE_TEST_SET = 11,
  RFPLM_ERR_MISMATCHED_GRIDS = 12,
  RFPLM_ERR_INTERNAL = 99
} rfplm_status;

typedef enum rfplm_estimator { RFPLM_LS = 0, RFPLM_M_HUBER = 1, RFPLM_MM = 2 } rfplm_estimator;
typedef enum rfplm_scenario { RFPLM_CLEAN = 0, RFPLM_C1 = 1, RFPLM_C2 = 2 } rfplm_scenario;
typedef enum rfplm_rule { RFPLM_RULE_GLOBAL = 0, RFPLM_RULE_FIRST_LOCAL = 1 } rfplm_rule;
typedef enum rfplm_target { RFPLM_TARGET_BETA = 0, RFPLM_TARGET_ETA = 1, RFPLM_TARGET_ETA_MOD = 2 } rfplm_target;
typedef enum rfplm_metric {
  RFPLM_BIAS2 = 0,
  RFPLM_MISE = 1,
  RFPLM_BIAS2_TRIM = 2,
  RFPLM_MISE_TRIM = 3
} rfplm_metric;

typedef struct rfplm_options {
  int estimator; /* rfplm_estimator */
  double c0;     /* S-scale bisquare tuning */
  double b;      /* M-scale right-hand side */
  double c1;     /* M-step bisquare tuning */
  double huber_c;
  int order; /* spline order, 4 = cubic */
  int quantile_eta_knots;
  int n_subsamples;
  int k_refine_steps;
  int best_candidates;
  double irwls_tol;
  int max_irwls_iter;
  uint64_t seed;
  int threads; /* workers for grid selection / Monte Carlo; 0 = all cores */
} rfplm_options;

typedef struct rfplm_grid {
  int p1_lo, p1_hi, p2_lo, p2_hi;
  int rule; /* rfplm_rule */
} rfplm_grid;

typedef struct rfplm_sim_config {
  int n;
  int n_rep;
  int n_terms;
  int grid_size;
  int scenario; /* rfplm_scenario */
  double mu;    /* ignored for RFPLM_CLEAN */
  double contamination;
  uint64_t seed;
  int metric_points;
  int trim_q; /* -1 = 5% of metric_points */
} rfplm_sim_config;

typedef struct rfplm_dataset rfplm_dataset;
typedef struct rfplm_fit rfplm_fit;
typedef struct rfplm_selection rfplm_selection;
typedef struct rfplm_report rfplm_report;

RFPLM_API const char* rfplm_version(void);
RFPLM_API const char* rfplm_status_name(rfplm_status status);
RFPLM_API const char* rfplm_last_error(void);
RFPLM_API void rfplm_string_free(char* s);

RFPLM_API void rfplm_options_init(rfplm_options* options);
RFPLM_API void rfplm_sim_config_init(rfplm_sim_config* config);
/* 4 <= p1, p2 <= 13 */
RFPLM_API void rfplm_grid_init(rfplm_grid* grid);
/* max(n^(1/5)/2, 4) <= p <= 8 + 2 n^(1/5) */
RFPLM_API rfplm_status rfplm_grid_from_sample_size(size_t n, int order, rfplm_grid* grid);

/* ---- datasets ---- */
RFPLM_API rfplm_status rfplm_dataset_load_csv(const char* curves_path, const char* scalars_path, rfplm_dataset** out);
RFPLM_API rfplm_status rfplm_dataset_save_csv(const rfplm_dataset* ds, const char* curves_path,
                                              const char* scalars_path);
/* curves and w are row-major (n x g and n x m); v and w may be NULL. */
RFPLM_API rfplm_status rfplm_dataset_create(size_t n, size_t g, const double* grid, const double* curves,
                                            const double* y, const double* z, const double* v, size_t m,
                                            const double* w, rfplm_dataset** out);
RFPLM_API rfplm_status rfplm_dataset_slice(const rfplm_dataset* ds, size_t begin, size_t end, rfplm_dataset** out);
RFPLM_API size_t rfplm_dataset_size(const rfplm_dataset* ds);
RFPLM_API rfplm_status rfplm_dataset_response(const rfplm_dataset* ds, double* out, size_t len);
RFPLM_API void rfplm_dataset_free(rfplm_dataset* ds);

/* ---- fitting ---- */
RFPLM_API rfplm_status rfplm_fit_create(const rfplm_dataset* ds, int p1, int p2, const rfplm_options* options,
                                        rfplm_fit** out);
RFPLM_API rfplm_status rfplm_select(const rfplm_dataset* ds, const rfplm_grid* grid, const rfplm_options* options,
                                    rfplm_selection** out);
RFPLM_API rfplm_status rfplm_selection_fit(const rfplm_selection* sel, rfplm_fit** out);
RFPLM_API rfplm_status rfplm_selection_to_json(const rfplm_selection* sel, char** json);
RFPLM_API void rfplm_selection_free(rfplm_selection* sel);

RFPLM_API rfplm_status rfplm_fit_dimensions(const rfplm_fit* fit, int* p1, int* p2);
RFPLM_API double rfplm_fit_sigma(const rfplm_fit* fit);
RFPLM_API double rfplm_fit_rbic(const rfplm_fit* fit);
RFPLM_API size_t rfplm_fit_residual_count(const rfplm_fit* fit);
RFPLM_API rfplm_status rfplm_fit_residuals(const rfplm_fit* fit, double* out, size_t len);
RFPLM_API rfplm_status rfplm_fit_eval_beta(const rfplm_fit* fit, const double* t, size_t len, double* out);
/* monotone != 0 evaluates the monotone modification of eta-hat */
RFPLM_API rfplm_status rfplm_fit_eval_eta(const rfplm_fit* fit, const double* z, size_t len, int monotone,
                                          double* out);
RFPLM_API rfplm_status rfplm_fit_predict(const rfplm_fit* fit, const rfplm_dataset* newdata, double* out, size_t len);
RFPLM_API rfplm_status rfplm_fit_to_json(const rfplm_fit* fit, int monotone, char** json);
RFPLM_API rfplm_status rfplm_fit_curves_csv(const rfplm_fit* fit, size_t points, int monotone, char** beta_csv,
                                            char** eta_csv);
RFPLM_API void rfplm_fit_free(rfplm_fit* fit);

/* ---- diagnostics ---- */
/* flags[i] = 1 outside the 1.5 IQR boxplot fences */
RFPLM_API rfplm_status rfplm_flag_outliers(const double* residuals, size_t n, int* flags);
/* flags may be NULL, in which case *mspe_clean is set to NaN */
RFPLM_API rfplm_status rfplm_prediction_metrics(const double* y, const double* y_hat, size_t n, const int* flags,
                                                double* mspe, double* medspe, double* mspe_clean);
/* values sampled on the uniform grid k/(n-1) */
RFPLM_API rfplm_status rfplm_monotone_modify(const double* values, size_t n, double* out);

/* ---- simulation ---- */
RFPLM_API rfplm_status rfplm_simulate(const rfplm_sim_config* config, int replicate, rfplm_dataset** out);
RFPLM_API rfplm_status rfplm_montecarlo(const rfplm_sim_config* config, const int* estimators, size_t n_estimators,
                                        const rfplm_grid* grid, const rfplm_options* options, rfplm_report** out);
RFPLM_API rfplm_status rfplm_report_metric(const rfplm_report* report, int estimator, int target, int metric,
                                           double* out);
RFPLM_API rfplm_status rfplm_report_failures(const rfplm_report* report, int estimator, int* failures);
RFPLM_API rfplm_status rfplm_report_to_json(const rfplm_report* report, char** json);
RFPLM_API rfplm_status rfplm_report_to_csv(const rfplm_report* report, char** csv);
RFPLM_API rfplm_status rfplm_report_grids_csv(const rfplm_report* report, char** csv);
RFPLM_API void rfplm_report_free(rfplm_report* report);

#ifdef __cplusplus
}
#endif

#endif /* RFPLM_RFPLM_H */

#ifndef STIEFEL_EKF_H
#define STIEFEL_EKF_H

/* C interface to the Stiefel-manifold EKF library.
 *
 * Every function returns an sekf_status. On failure the message is available
 * from sekf_last_error() on the calling thread until the next call.
 * Matrices cross the boundary as row-major arrays of n*k doubles. */

#include <stddef.h>
#include <stdint.h>

#if defined(SEKF_BUILDING_LIBRARY)
#define SEKF_API __attribute__((visibility("default")))
#else
#define SEKF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sekf_status {
  SEKF_OK = 0,
  SEKF_DIMENSION = 1,
  SEKF_NON_FINITE = 2,
  SEKF_SINGULAR_PROJECTION = 3,
  SEKF_NOT_ON_MANIFOLD = 4,
  SEKF_NOT_TANGENT = 5,
  SEKF_BASE_MISMATCH = 6,
  SEKF_OUT_OF_INJECTIVITY_RADIUS = 7,
  SEKF_DOMAIN = 8,
  SEKF_MEAN_NOT_FOUND = 9,
  SEKF_INSUFFICIENT_SAMPLE = 10,
  SEKF_UNRELIABLE_REGIME = 11,
  SEKF_EXTRAPOLATION = 12,
  SEKF_ABORTED_TRAJECTORY = 13,
  SEKF_MEASUREMENT_FAILED = 14,
  SEKF_VARIANCE_OVERFLOW = 15,
  SEKF_CONFIG = 16,
  SEKF_IO = 17,
  SEKF_INTERNAL = 18,
  SEKF_INVALID_ARGUMENT = 19
} sekf_status;

typedef struct sekf_config sekf_config;
typedef struct sekf_report sekf_report;
typedef struct sekf_point sekf_point;
typedef struct sekf_eta_table sekf_eta_table;
typedef struct sekf_filter sekf_filter;

SEKF_API const char* sekf_version(void);
SEKF_API const char* sekf_status_string(sekf_status status);
SEKF_API const char* sekf_last_error(void);

/* Configuration */
SEKF_API sekf_status sekf_config_load(const char* path, sekf_config** out);
SEKF_API sekf_status sekf_config_parse(const char* json, sekf_config** out);
/* Reference parameter sets: "s2" or "st42". */
SEKF_API sekf_status sekf_config_reference(const char* name, sekf_config** out);
/* Dotted key ("eta.draws") set to a JSON value ("5000"). */
SEKF_API sekf_status sekf_config_set(sekf_config* config, const char* key, const char* json_value);
/* Applies all pairs, then validates once; on failure nothing changes. */
SEKF_API sekf_status sekf_config_set_many(sekf_config* config, const char* const* keys,
                                          const char* const* json_values, size_t count);
SEKF_API sekf_status sekf_config_set_seed(sekf_config* config, uint64_t seed);
SEKF_API sekf_status sekf_config_set_output_dir(sekf_config* config, const char* dir);
SEKF_API sekf_status sekf_config_set_workers(sekf_config* config, int workers);
/* "ambient-noise" or "tangent-noise" */
SEKF_API sekf_status sekf_config_set_noise_mode(sekf_config* config, const char* mode);
/* Returns the resolved config; the string is owned by the handle and valid
 * until the next call on it. */
SEKF_API sekf_status sekf_config_to_json(sekf_config* config, const char** out);
SEKF_API void sekf_config_free(sekf_config* config);

/* Experiments */
SEKF_API sekf_status sekf_run_single(const sekf_config* config, sekf_report** out);
SEKF_API sekf_status sekf_run_sweep(const sekf_config* config, sekf_report** out);
SEKF_API sekf_status sekf_run_eta(const sekf_config* config, sekf_report** out);
/* Runs whatever the config's "mode" selects. */
SEKF_API sekf_status sekf_run(const sekf_config* config, sekf_report** out);

typedef struct sekf_sweep_cell {
  double process_noise;
  double measurement_noise;
  double snr_db;
  double snr_eta_db;
  double measurement_error;
  double measurement_se;
  double filter_error;
  double filter_se;
  int completed;
  int aborted;
  uint64_t skipped_updates;
  int valid;
} sekf_sweep_cell;

SEKF_API const char* sekf_report_summary(const sekf_report* report);
SEKF_API size_t sekf_report_file_count(const sekf_report* report);
SEKF_API const char* sekf_report_file(const sekf_report* report, size_t index);
/* Sweep reports only; zero otherwise. */
SEKF_API size_t sekf_report_cell_count(const sekf_report* report);
SEKF_API sekf_status sekf_report_cell(const sekf_report* report, size_t index, sekf_sweep_cell* out);
/* Single-run reports: mean measurement and filter error over the epochs. */
SEKF_API sekf_status sekf_report_errors(const sekf_report* report, double* measurement, double* filter);
SEKF_API void sekf_report_free(sekf_report* report);

/* Manifold points and geometry. Tangent vectors are plain n*k arrays tied to
 * a base point by the caller. */
SEKF_API sekf_status sekf_point_create(int n, int k, const double* data, sekf_point** out);
/* Polar projection of an arbitrary full-rank n x k matrix. */
SEKF_API sekf_status sekf_point_project(int n, int k, const double* data, sekf_point** out);
SEKF_API sekf_status sekf_point_dims(const sekf_point* point, int* n, int* k);
SEKF_API sekf_status sekf_point_copy_data(const sekf_point* point, double* out, size_t capacity);
SEKF_API void sekf_point_free(sekf_point* point);

SEKF_API sekf_status sekf_exp_map(const sekf_point* x, const double* v, sekf_point** out);
/* Writes n*k doubles. */
SEKF_API sekf_status sekf_log_map(const sekf_point* x, const sekf_point* y, double* out);
SEKF_API sekf_status sekf_distance(const sekf_point* x, const sekf_point* y, double* out);
SEKF_API sekf_status sekf_inner(const sekf_point* x, const double* v, const double* w, double* out);

/* Eta tables */
SEKF_API sekf_status sekf_eta_table_load(const char* path, sekf_eta_table** out);
SEKF_API sekf_status sekf_eta_table_save(const sekf_eta_table* table, const char* path);
/* method: "auto", "quadrature" or "monte-carlo" */
SEKF_API sekf_status sekf_eta_table_build(int n, int k, double grid_min, double grid_max, int nodes,
                                          uint64_t draws, uint64_t seed, const char* method,
                                          int workers, sekf_eta_table** out);
SEKF_API sekf_status sekf_eta_forward(const sekf_eta_table* table, double sigma2, double* out);
SEKF_API sekf_status sekf_eta_inverse(const sekf_eta_table* table, double p, double* out);
SEKF_API void sekf_eta_table_free(sekf_eta_table* table);
SEKF_API sekf_status sekf_eta_closed_form_s2(double sigma2, double* out);

/* Filter */
typedef struct sekf_model {
  int n;
  int k;
  const double* drift;         /* n x n, antisymmetric */
  double process_noise;        /* nu^2 */
  double measurement_noise;    /* xi^2 */
  const double* initial_mean;  /* n x k on the manifold */
  double initial_variance;     /* sigma_0^2 */
  int skip_on_log_failure;     /* nonzero: skip updates the log cannot reach */
} sekf_model;

typedef struct sekf_belief_info {
  double ambient_variance;
  double intrinsic_variance;
  double gain;     /* of the last update */
  int skipped;     /* last update skipped */
} sekf_belief_info;

/* The table is copied. */
SEKF_API sekf_status sekf_filter_create(const sekf_model* model, const sekf_eta_table* table,
                                        sekf_filter** out);
SEKF_API sekf_status sekf_filter_predict(sekf_filter* filter, double dt);
SEKF_API sekf_status sekf_filter_update(sekf_filter* filter, const sekf_point* measurement);
/* mean: n*k doubles, may be NULL; info may be NULL. */
SEKF_API sekf_status sekf_filter_state(const sekf_filter* filter, double* mean, sekf_belief_info* info);
SEKF_API void sekf_filter_free(sekf_filter* filter);

#ifdef __cplusplus
}
#endif

#endif

#ifndef GAPOPT_GAPOPT_H
#define GAPOPT_GAPOPT_H

#include <stddef.h>

#if defined(_WIN32)
#define GAPOPT_API __declspec(dllexport)
#else
#define GAPOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gapopt_config gapopt_config;
typedef struct gapopt_result gapopt_result;

typedef enum gapopt_status {
  GAPOPT_OK = 0,
  GAPOPT_ERR_INVALID_ARGUMENT = 1,
  GAPOPT_ERR_PARSE = 2,
  GAPOPT_ERR_TOO_LARGE = 3,
  GAPOPT_ERR_EMPTY_SECTOR = 4,
  GAPOPT_ERR_CONVERGENCE = 5,
  GAPOPT_ERR_FEASIBILITY = 6,
  GAPOPT_ERR_STIFFNESS = 7,
  GAPOPT_ERR_IO = 8,
  GAPOPT_ERR_INTERNAL = 9
} gapopt_status;

typedef struct gapopt_point {
  double lambda;
  double gap_canonical;
  double gap_optimized;
  double grad_norm;
  int n_iter;
  int converged;
  int ok;
  int certified;
} gapopt_point;

GAPOPT_API const char* gapopt_version(void);
GAPOPT_API const char* gapopt_status_string(gapopt_status status);

/* Message of the last failed call on this thread ("" if none). */
GAPOPT_API const char* gapopt_last_error(void);

/* "trace", "debug", "info", "warn", "error" or "off". */
GAPOPT_API gapopt_status gapopt_set_log_level(const char* level);

GAPOPT_API gapopt_status gapopt_config_load(const char* path, gapopt_config** out);
GAPOPT_API gapopt_status gapopt_config_parse(const char* text, gapopt_config** out);
GAPOPT_API gapopt_status gapopt_config_set_out_dir(gapopt_config* config, const char* dir);
GAPOPT_API void gapopt_config_free(gapopt_config* config);

/* Feasibility report as JSON; *feasible is 1 when no size guard refuses the
   run. Free the string with gapopt_string_free. */
GAPOPT_API gapopt_status gapopt_validate(const gapopt_config* config, char** report_json,
                                         int* feasible);

/* Runs every instance and writes the output files. Returns GAPOPT_OK as long
   as at least one instance succeeded. */
GAPOPT_API gapopt_status gapopt_run(const gapopt_config* config, int workers,
                                    gapopt_result** out);

GAPOPT_API size_t gapopt_result_instance_count(const gapopt_result* result);
GAPOPT_API size_t gapopt_result_failed_count(const gapopt_result* result);
GAPOPT_API size_t gapopt_result_point_count(const gapopt_result* result, size_t instance);
GAPOPT_API gapopt_status gapopt_result_point(const gapopt_result* result, size_t instance,
                                             size_t point, gapopt_point* out);
GAPOPT_API gapopt_status gapopt_result_summary_json(const gapopt_result* result, char** json);
GAPOPT_API void gapopt_result_free(gapopt_result* result);

/* Gap of the configured problem (first instance) at one lambda and
   parameter vector, in the config's parametrization. */
GAPOPT_API gapopt_status gapopt_gap(const gapopt_config* config, double lambda,
                                    const double* params, size_t n_params, double* gap);

GAPOPT_API void gapopt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

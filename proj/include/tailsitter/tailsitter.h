#ifndef TAILSITTER_H
#define TAILSITTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(TS_BUILDING_LIBRARY)
#define TS_API __attribute__((visibility("default")))
#else
#define TS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
    TS_OK = 0,
    TS_ERR_ARGUMENT = 1,   /* null pointer or invalid value */
    TS_ERR_CONFIG = 2,     /* unreadable or invalid configuration */
    TS_ERR_NUMERICAL = 3,  /* simulation or solver left the finite range */
    TS_ERR_IO = 4,
    TS_ERR_SCHEMA = 5,     /* logs with different columns or lengths */
    TS_ERR_INTERNAL = 6
} ts_status;

typedef struct ts_tf ts_tf;
typedef struct ts_report ts_report;

/* Message of the last failed call on this thread; never NULL. */
TS_API const char* ts_last_error(void);
/* Source line of the last configuration error, 0 when unknown. */
TS_API int ts_last_error_line(void);
TS_API const char* ts_version(void);

/* Strings returned through char** are owned by the caller. */
TS_API void ts_string_free(char* s);

/* Transfer functions: num/den ascending in s, pure delay in seconds. */
TS_API ts_status ts_tf_create(const double* num, size_t num_len, const double* den, size_t den_len, double delay_s,
                              ts_tf** out);
/* YAML tf config (kind: plant | controller | loop | rational). band_lo/band_hi may be NULL. */
TS_API ts_status ts_tf_from_config(const char* yaml_text, ts_tf** out, double* band_lo, double* band_hi);
TS_API ts_status ts_tf_reference_plant(ts_tf** out);
TS_API void ts_tf_free(ts_tf* tf);
TS_API ts_status ts_tf_eval(const ts_tf* tf, double freq_hz, double* re, double* im);
/* CSV freq_hz,mag_db,phase_deg. */
TS_API ts_status ts_tf_bode_csv(const ts_tf* tf, double f_lo, double f_hi, int points_per_decade, char** csv);

typedef struct ts_margins {
    int has_crossover;
    double crossover_hz;
    double phase_margin_deg;
    int has_phase_crossover;
    double phase_crossover_hz;
    double gain_margin_db;
    int crossings;
    int conditionally_unstable;
} ts_margins;

TS_API ts_status ts_tf_margins(const ts_tf* tf, double f_lo, double f_hi, ts_margins* out);
TS_API ts_status ts_tf_slope(const ts_tf* tf, double f_lo, double f_hi, double* db_per_decade);

/* Runs and reports. out_dir may be NULL or empty to skip writing artifacts.
 * A path of the form "builtin:<name>" selects a built-in scenario. seed < 0 keeps the scenario seed. */
TS_API ts_status ts_run_scenario(const char* path, int64_t seed, const char* out_dir, ts_report** out);
TS_API ts_status ts_run_pipeline(const char* config_path, const char* out_dir, ts_report** out);
/* Compares two telemetry CSV files. */
TS_API ts_status ts_compare_logs(const char* path_a, const char* path_b, ts_report** out);

TS_API void ts_report_free(ts_report* r);
TS_API int ts_report_passed(const ts_report* r);
TS_API const char* ts_report_text(const ts_report* r);
TS_API size_t ts_report_metric_count(const ts_report* r);
/* name points into the report and lives as long as it does. */
TS_API ts_status ts_report_metric_at(const ts_report* r, size_t index, const char** name, double* value);
TS_API ts_status ts_report_metric(const ts_report* r, const char* name, double* value);

/* Reference controller and plant defaults as YAML. */
TS_API ts_status ts_reference_config(char** yaml_text);
/* Names of built-in scenarios, newline separated. */
TS_API ts_status ts_builtin_scenarios(char** names);
TS_API ts_status ts_builtin_scenario_text(const char* name, char** yaml_text);

#ifdef __cplusplus
}
#endif

#endif

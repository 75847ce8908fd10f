// Copyright 2026 The Unistab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the unistab library. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Every call
 * that can fail returns a us_status; the message for the most recent
 * failure on the calling thread is available from us_last_error(). */

#ifndef UNISTAB_UNISTAB_H_
#define UNISTAB_UNISTAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(UNISTAB_BUILDING)
#define US_API __attribute__((visibility("default")))
#else
#define US_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum us_status {
  US_OK = 0,
  US_INVALID_ARGUMENT = 1,
  US_CONFIG_ERROR = 2,
  US_IO_ERROR = 3,
  US_OUT_OF_RANGE = 4,
  US_INTERNAL_ERROR = 5
} us_status;

typedef enum us_bound_kind {
  US_BOUND_BE02 = 0,
  US_BOUND_FV18 = 1,
  US_BOUND_MAIN = 2,
  US_BOUND_THM_LARGE = 3,
  US_BOUND_THM_SMALL = 4
} us_bound_kind;

typedef enum us_format { US_FORMAT_CSV = 0, US_FORMAT_JSON = 1 } us_format;

typedef struct us_config us_config;
typedef struct us_report us_report;

US_API const char* us_version(void);
/* Message of the last failed call on this thread; "" if none. */
US_API const char* us_last_error(void);
US_API void us_string_free(char* s);

/* Bounds. `valid` (may be NULL) receives 1 when the theorem's hypotheses hold. */
US_API us_status us_bound_eval(us_bound_kind kind, double n, double range, double gamma,
                               double delta, double* value, int* valid);
US_API us_status us_mcdiarmid_tail(double n, double gamma, double t, double* value);
US_API us_status us_dp_generalization_bound(double n, double epsilon, double delta,
                                            double* value, int* valid);
US_API us_status us_replacement_rate_tail(size_t steps, size_t k, size_t n, double eta,
                                          double beta, double* value);

/* Configuration. */
US_API us_status us_config_create(us_config** out);
US_API us_status us_config_from_json(const char* json, us_config** out);
US_API us_status us_config_load(const char* path, us_config** out);
/* Overwrites the keys present in `json`. */
US_API us_status us_config_merge_json(us_config* cfg, const char* json);
/* *out is released with us_string_free. */
US_API us_status us_config_to_json(const us_config* cfg, char** out);
US_API void us_config_free(us_config* cfg);

/* Runs. Each produces a table-shaped report. `violations` (may be NULL)
 * receives the number of certificate-violation findings. */
US_API us_status us_run_bounds(const us_config* cfg, us_report** out);
US_API us_status us_run_tail(const us_config* cfg, us_report** out, size_t* violations);
US_API us_status us_run_excess(const us_config* cfg, us_report** out);
US_API us_status us_run_clamp_audit(const us_config* cfg, us_report** out, size_t* violations);
US_API us_status us_run_stability_audit(const us_config* cfg, us_report** out, size_t* violations);

/* Reports. */
US_API size_t us_report_rows(const us_report* r);
US_API size_t us_report_columns(const us_report* r);
US_API const char* us_report_column_name(const us_report* r, size_t col);
/* Numeric cells only (integers and booleans convert). */
US_API us_status us_report_get_double(const us_report* r, size_t row, size_t col, double* value);
US_API us_status us_report_to_string(const us_report* r, us_format format, char** out);
/* Writes to `path`, or to standard output when path is NULL or "". */
US_API us_status us_report_write(const us_report* r, us_format format, const char* path);
US_API void us_report_free(us_report* r);

#ifdef __cplusplus
}
#endif

#endif /* UNISTAB_UNISTAB_H_ */

// Copyright 2026 The pfmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PFMC_PFMC_H
#define PFMC_PFMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PFMC_API __declspec(dllexport)
#else
#define PFMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The values of VALIDATION and CAPACITY match the CLI exit codes. */
typedef enum pfmc_status {
  PFMC_OK = 0,
  PFMC_ERR_INTERNAL = 1,
  PFMC_ERR_VALIDATION = 2,
  PFMC_ERR_CAPACITY = 3,
  PFMC_ERR_IO = 4,
  PFMC_ERR_ARGUMENT = 5
} pfmc_status;

typedef struct pfmc_experiment pfmc_experiment;
typedef struct pfmc_result pfmc_result;

/* One result row. Strings stay valid until the owning result is freed. */
typedef struct pfmc_row {
  const char* observable;
  const char* params;
  double value_re;
  double value_im;
  double std_error;
  int64_t samples;
  double bound;
  double epsilon;
  double delta;
  int certified;
  const char* method;
  double wall_time;
} pfmc_row;

PFMC_API const char* pfmc_version(void);

/* Message of the last failed call on this thread; empty after a success. */
PFMC_API const char* pfmc_last_error(void);

/* Parses and fully validates an experiment; no sampling happens here. */
PFMC_API pfmc_status pfmc_experiment_from_json(const char* json_text, pfmc_experiment** out);
PFMC_API pfmc_status pfmc_experiment_from_file(const char* path, pfmc_experiment** out);
PFMC_API void pfmc_experiment_free(pfmc_experiment* e);

PFMC_API pfmc_status pfmc_experiment_set_seed(pfmc_experiment* e, uint64_t seed);
/* 0 selects PFMC_THREADS, else 1. */
PFMC_API pfmc_status pfmc_experiment_set_threads(pfmc_experiment* e, int threads);
/* Output path from the config, or NULL when the config names none. */
PFMC_API const char* pfmc_experiment_output_path(const pfmc_experiment* e);

PFMC_API pfmc_status pfmc_run(const pfmc_experiment* e, pfmc_result** out);
/* Brute-force statevector values on guard-sized inputs. */
PFMC_API pfmc_status pfmc_oracle(const pfmc_experiment* e, pfmc_result** out);

PFMC_API size_t pfmc_result_num_rows(const pfmc_result* r);
PFMC_API pfmc_status pfmc_result_row(const pfmc_result* r, size_t index, pfmc_row* out);
/* Writes the CSV and a JSON sidecar with the same stem. */
PFMC_API pfmc_status pfmc_result_write(const pfmc_result* r, const char* csv_path);
PFMC_API void pfmc_result_free(pfmc_result* r);

/* Tidy (x, y, yerr, series) CSV from a result file and a plot spec file.
   The text is returned in *out and released with pfmc_string_free. */
PFMC_API pfmc_status pfmc_plotdata(const char* result_csv_path, const char* plotspec_path, char** out);
PFMC_API void pfmc_string_free(char* s);

/* Pfaffian of an n x n skew-symmetric matrix, row-major, interleaved re/im. */
PFMC_API pfmc_status pfmc_pfaffian(size_t n, const double* re_im, double out[2]);

#ifdef __cplusplus
}
#endif

#endif

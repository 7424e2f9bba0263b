/* Copyright 2026 The FPA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef FPA_FPA_H_
#define FPA_FPA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FPA_API __declspec(dllexport)
#else
#define FPA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning fpa_status leaves a message for
 * fpa_last_error() on the calling thread when it fails. */
typedef enum fpa_status {
  FPA_OK = 0,
  FPA_ERR_INVALID_ARGUMENT = 1,
  FPA_ERR_IO = 2,
  FPA_ERR_PARSE = 3,
  FPA_ERR_TRANSPORT = 4,
  FPA_ERR_BACKEND = 5,
  FPA_ERR_UNSCORABLE = 6,
  FPA_ERR_UNDEFINED = 7,
  FPA_ERR_VALIDATION = 8,
  FPA_ERR_NOT_FOUND = 9,
  FPA_ERR_CANCELLED = 10,
  FPA_ERR_INTERNAL = 99
} fpa_status;

typedef struct fpa_engine fpa_engine;

FPA_API const char* fpa_version(void);
/* Message of the last failure on this thread; empty when none. */
FPA_API const char* fpa_last_error(void);
/* Releases strings returned through char** out-parameters. */
FPA_API void fpa_free(char* p);

/* options_json: {"synthetic": true, "world": {...}} or
 * {"backend_config": "path"}, plus optional "cache_dir". */
FPA_API fpa_status fpa_engine_create(const char* options_json, fpa_engine** out);
FPA_API void fpa_engine_destroy(fpa_engine* engine);

/* prompt_json: {"id","text","dataset"}; config_json: {"m","k","q","seed",
 * "pool_incumbent","image_seed_policy","mode"} (all optional).
 * On success *record_json holds one serialized record. */
FPA_API fpa_status fpa_engine_optimize(fpa_engine* engine, const char* prompt_json,
                                       const char* config_json, char** record_json);

/* mode: "finetuned" or "icl"; examples_json: array of {"original","optimized"}.
 * *result_json: {"optimized","messages","stats"}. */
FPA_API fpa_status fpa_engine_one_pass(fpa_engine* engine, const char* prompt_json,
                                       const char* mode, const char* examples_json,
                                       uint64_t seed, char** result_json);

/* Pipeline commands. Return the process exit code (0 ok, 1 fatal, 2 partial)
 * and, when summary_json is non-null, {"exit_code","output","error","summary"}. */
FPA_API int fpa_cmd_optimize(const char* options_json, char** summary_json);
FPA_API int fpa_cmd_one_pass(const char* options_json, char** summary_json);
FPA_API int fpa_cmd_export(const char* options_json, char** summary_json);
FPA_API int fpa_cmd_report(const char* options_json, char** summary_json);
FPA_API int fpa_cmd_correlate(const char* options_json, char** summary_json);

/* Asks a running fpa_cmd_optimize to stop after in-flight prompts. Safe to
 * call from a signal handler. */
FPA_API void fpa_request_cancel(void);
FPA_API void fpa_reset_cancel(void);

FPA_API fpa_status fpa_report_average(double tifa, double vqa, double* out);
FPA_API fpa_status fpa_pearson(const double* x, const double* y, size_t n, double* out);
/* *problems_json: array of violated invariants; empty array when valid. */
FPA_API fpa_status fpa_validate_record_json(const char* record_json, char** problems_json);
FPA_API fpa_status fpa_assemble_icl_messages(const char* new_prompt, const char* examples_json,
                                             char** messages_json);

#ifdef __cplusplus
}
#endif

#endif  // FPA_FPA_H_

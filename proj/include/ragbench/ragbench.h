// Copyright (C) 2026 The ragbench Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#ifndef RAGBENCH_RAGBENCH_H
#define RAGBENCH_RAGBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RGB_API __declspec(dllimport)
#elif defined(RAGBENCH_BUILDING)
#define RGB_API __attribute__((visibility("default")))
#else
#define RGB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values are stable across releases. */
typedef enum rgb_status {
    RGB_OK = 0,
    RGB_INVALID_ARGUMENT = 1,
    RGB_INVALID_MIX = 2,
    RGB_EMPTY_POPULATION = 3,
    RGB_NO_MUTABLE_TOKEN = 4,
    RGB_EXHAUSTED_CORPUS = 5,
    RGB_EMPTY_QUESTION_POOL = 6,
    RGB_INVALID_CHUNK_PARAMS = 7,
    RGB_DIMENSION_MISMATCH = 8,
    RGB_EMPTY_INDEX = 9,
    RGB_UNKNOWN_FILE_ID = 10,
    RGB_BAD_TEMPLATE = 11,
    RGB_EMPTY_INPUT = 12,
    RGB_NOT_TRAINED = 13,
    RGB_DUPLICATE_ID = 14,
    RGB_TIMEOUT = 15,
    RGB_REMOTE_ERROR = 16,
    RGB_STREAM_ABORTED = 17,
    RGB_UNSUPPORTED = 18,
    RGB_PARSE_ERROR = 19,
    RGB_SCHEMA_ERROR = 20,
    RGB_OUTPUT_UNWRITABLE = 21,
    RGB_ALL_PROBES_UNAVAILABLE = 22,
    RGB_SECOND_START_REJECTED = 23,
    RGB_PROBE_READ_ERROR = 24,
    RGB_PARTIAL_FLUSH = 25,
    RGB_EMPTY_SAMPLES = 26,
    RGB_EMPTY_DENOMINATOR = 27,
    RGB_CORRUPT_LOG = 28,
    RGB_SCHEMA_VERSION_MISMATCH = 29,
    RGB_MISSING_SNAPSHOT = 30,
    RGB_MALFORMED_RECORD = 31,
    RGB_DIGEST_MISMATCH = 32,
    RGB_IO = 33,
    RGB_INTERRUPTED = 34,
    RGB_INTERNAL = 35
} rgb_status;

typedef struct rgb_config rgb_config;
typedef struct rgb_run rgb_run;
typedef struct rgb_monitor rgb_monitor;

RGB_API const char* rgb_version(void);
RGB_API const char* rgb_status_name(int status);

/* Message of the last failed call on this thread; "" when none. Valid until
   the next call on the same thread. */
RGB_API const char* rgb_last_error(void);
/* Process exit code for the last failure on this thread:
   2 config, 3 index, 4 run, 5 report; 1 for other failures, 0 after success. */
RGB_API int rgb_last_exit_code(void);

/* SIGINT/SIGTERM request a graceful stop: running benchmarks and monitors
   finish their artifacts. A second signal terminates the process. */
RGB_API rgb_status rgb_install_signal_handlers(void);
RGB_API void rgb_request_stop(void);
RGB_API int rgb_stop_requested(void);

/* Config. Diagnostics (one per line, with key path and line number) are
   reported through rgb_last_error. */
RGB_API rgb_status rgb_config_load(const char* path, rgb_config** out);
RGB_API void rgb_config_free(rgb_config* cfg);
RGB_API const char* rgb_config_digest(const rgb_config* cfg);
RGB_API const char* rgb_config_run_id(const rgb_config* cfg);
RGB_API const char* rgb_config_output_dir(const rgb_config* cfg);
/* Contacts remote stores to compare declared capabilities with the run. */
RGB_API rgb_status rgb_config_check_backends(const rgb_config* cfg);

typedef struct rgb_index_summary {
    uint64_t documents_indexed;
    uint64_t chunk_count;
    uint64_t index_bytes;
    double build_seconds;
} rgb_index_summary;

/* Builds the index and writes the snapshot under <output_dir>/index. */
RGB_API rgb_status rgb_index(const rgb_config* cfg, rgb_index_summary* summary);

typedef struct rgb_run_options {
    int skip_index;             /* reuse the snapshot written by rgb_index */
    const char* emit_trace;     /* optional path for the generated request stream */
} rgb_run_options;

RGB_API rgb_status rgb_run_benchmark(const rgb_config* cfg, const rgb_run_options* options, rgb_run** out);
RGB_API void rgb_run_free(rgb_run* run);
RGB_API int rgb_run_partial(const rgb_run* run);
RGB_API uint64_t rgb_run_completed(const rgb_run* run);
RGB_API double rgb_run_wall_seconds(const rgb_run* run);
/* Artifact names: "run_dir", "request_log", "trace", "quality", "index_stats",
   "manifest", "report_json", "report_csv", "report_svg". NULL when unknown. */
RGB_API const char* rgb_run_artifact(const rgb_run* run, const char* name);
/* Report document as JSON text. */
RGB_API const char* rgb_run_report(const rgb_run* run);

typedef struct rgb_report_options {
    const char* request_log;   /* required */
    const char* trace;         /* optional */
    const char* quality;       /* optional */
    const char* index_stats;   /* optional */
    const char* out_dir;       /* required */
    const char* formats;       /* comma separated subset of json,csv,svg; NULL = json */
    const char* recall_mode;   /* "recall" (default) or "precision" */
} rgb_report_options;

RGB_API rgb_status rgb_report(const rgb_report_options* options);

typedef struct rgb_monitor_options {
    uint32_t interval_ms;        /* 0 = 100 */
    const char* output;          /* required */
    const int* pids;             /* optional */
    size_t pid_count;
    const char* const* cgroups;  /* optional */
    size_t cgroup_count;
    const char* probes;          /* comma separated probe names; NULL = defaults */
    size_t buffer_bytes;         /* per metric; 0 = 2 MiB */
} rgb_monitor_options;

typedef struct rgb_monitor_summary {
    uint64_t samples_written;
    uint64_t samples_dropped;
    uint64_t trace_bytes;
    int partial;
} rgb_monitor_summary;

RGB_API rgb_status rgb_monitor_start(const rgb_monitor_options* options, rgb_monitor** out);
/* Idempotent; fills `summary` when non-NULL. */
RGB_API rgb_status rgb_monitor_stop(rgb_monitor* mon, rgb_monitor_summary* summary);
RGB_API void rgb_monitor_free(rgb_monitor* mon);

/* Writes `count` synthetic documents as a jsonl corpus. */
RGB_API rgb_status rgb_synth_corpus(const char* path, uint64_t count, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* RAGBENCH_RAGBENCH_H */

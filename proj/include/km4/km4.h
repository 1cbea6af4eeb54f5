// Copyright 2026 The km4 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the km4 library. All strings are UTF-8 and NUL-terminated.
 * Strings returned through `char**` out-parameters are owned by the caller
 * and released with km4_string_free. On failure the out-parameters are left
 * untouched and km4_last_error() describes the problem. */
#ifndef KM4_KM4_H_
#define KM4_KM4_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(KM4_BUILDING_LIBRARY)
#define KM4_API __attribute__((visibility("default")))
#else
#define KM4_API
#endif

typedef enum km4_status {
  KM4_OK = 0,
  KM4_ERR_INVALID_ARGUMENT = 1,
  KM4_ERR_NOT_FOUND = 2,
  KM4_ERR_CONFLICT = 3,
  KM4_ERR_IO = 4,
  KM4_ERR_PARSE = 5,
  KM4_ERR_INTERNAL = 6
} km4_status;

typedef struct km4_workspace km4_workspace;
typedef struct km4_server km4_server;

KM4_API const char* km4_version(void);
KM4_API const char* km4_status_name(km4_status status);
/* Message of the last failure on the calling thread; "" if none. */
KM4_API const char* km4_last_error(void);
KM4_API void km4_string_free(char* s);

/* Built-in schema listing, one class per line. */
KM4_API km4_status km4_schema_dump(char** out_text);

/* Workspaces: a directory holding the store log, staging area, registry
 * and schedule. Created when missing. */
KM4_API km4_status km4_workspace_open(const char* dir, km4_workspace** out);
KM4_API void km4_workspace_close(km4_workspace* ws);

/* Registers a dataset from descriptor and mapping text; returns the data
 * context IRI. */
KM4_API km4_status km4_dataset_register(km4_workspace* ws, const char* descriptor, const char* mapping,
                                        char** out_context);
/* JSON array of descriptors. */
KM4_API km4_status km4_dataset_list(km4_workspace* ws, char** out_json);
/* Runs the whole pipeline on one file; returns a JSON report. */
KM4_API km4_status km4_ingest_file(km4_workspace* ws, const char* dataset_id, const char* path, char** out_json);
/* Runs every scheduled job due up to `until` (an ISO date-time) in
 * simulated time; returns a JSON array of job reports. */
KM4_API km4_status km4_schedule_run(km4_workspace* ws, const char* until, char** out_json);
/* Posts real-time payloads of one type (parking, avm, weather,
 * observation). `dataset_id` may be NULL for "<type>-feed". */
KM4_API km4_status km4_feed_post(km4_workspace* ws, const char* type, const char* dataset_id, const char* payload,
                                 char** out_json);
/* Per-macroclass quad counts as TSV. */
KM4_API km4_status km4_store_stats(km4_workspace* ws, char** out_tsv);
/* Sorted N-Quads; `context` may be NULL for the whole store. */
KM4_API km4_status km4_store_export(km4_workspace* ws, const char* context, char** out_nquads);
/* Drops real-time records older than now - window into `archive` and adds
 * aggregates. `now` may be NULL for the current time. */
KM4_API km4_status km4_store_compact(km4_workspace* ws, const char* window, const char* now, const char* archive,
                                     char** out_json);

/* Splits and normalizes a free-text address. `municipality` (may be NULL)
 * overrides the one found in the text; `qualifiers` (may be NULL) names an
 * extra qualifier table. Returns JSON when `as_json` is non-zero, else a
 * readable listing. */
KM4_API km4_status km4_normalize(const char* address, const char* municipality, const char* qualifiers, int as_json,
                                 char** out);
/* Reconciles a services file against `catalog` (a catalog file) or, when
 * NULL, the workspace catalog. Writes links to `out_links` as TSV and
 * returns a JSON summary. With `apply` non-zero the links are written into
 * the workspace store. */
KM4_API km4_status km4_reconcile(km4_workspace* ws, const char* method, const char* services, const char* catalog,
                                 int apply, char** out_links, char** out_summary);
/* Scores a links file against a gold file; returns JSON metrics. */
KM4_API km4_status km4_eval(const char* gold, const char* links, char** out_json);
/* Writes catalog.tsv, services.tsv and gold.tsv for a synthetic corpus.
 * `spec` is key=value text; NULL means defaults. */
KM4_API km4_status km4_corpus_generate(const char* spec, const char* out_dir);
/* Generates the corpus of `spec` (NULL for defaults), compares `methods`
 * ("all" or a comma list) and returns the TSV table plus a JSON report
 * with timings. `out_report` may be NULL. */
KM4_API km4_status km4_bench(const char* spec, const char* methods, char** out_tsv, char** out_report);

/* Starts the HTTP service on a background thread. Port 0 picks a free
 * port, reported through `bound_port`. */
KM4_API km4_status km4_server_start(km4_workspace* ws, const char* host, int port, km4_server** out,
                                    int* bound_port);
/* Blocks until the server stops. */
KM4_API void km4_server_wait(km4_server* server);
KM4_API void km4_server_stop(km4_server* server);
/* Stops if needed and releases the server. */
KM4_API void km4_server_free(km4_server* server);

#ifdef __cplusplus
}
#endif

#endif /* KM4_KM4_H_ */

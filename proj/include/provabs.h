/* Copyright 2026 The provabs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API of the provenance-abstraction library. Inputs are held behind opaque
 * handles; operations take an options document (JSON text, may be NULL or
 * empty for defaults) and return a report as JSON text allocated by the
 * library. Free returned strings with provabs_string_free and handles with
 * the matching *_free function.
 *
 * Status codes mirror the CLI exit codes: 0 success, 1 no solution / below
 * threshold, 2 invalid input, 3 cap exceeded (result incomplete). On any
 * nonzero status provabs_last_error() returns a thread-local diagnostic.
 *
 * Handles are immutable after creation; concurrent operations may share them
 * freely. Each operation owns its internal scratch state.
 */

#ifndef PROVABS_H
#define PROVABS_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum provabs_status {
  PROVABS_OK = 0,
  PROVABS_NO_SOLUTION = 1,
  PROVABS_INPUT_ERROR = 2,
  PROVABS_CAP_EXCEEDED = 3,
  PROVABS_INTERNAL_ERROR = 4
} provabs_status;

typedef struct provabs_database provabs_database;
typedef struct provabs_tree provabs_tree;
typedef struct provabs_example provabs_example;

const char* provabs_version(void);

/* Thread-local message describing the most recent failure on this thread. */
const char* provabs_last_error(void);

void provabs_string_free(char* text);

provabs_status provabs_database_from_string(const char* text, provabs_database** out);
provabs_status provabs_database_from_file(const char* path, provabs_database** out);
void provabs_database_free(provabs_database* db);

provabs_status provabs_tree_from_string(const char* text, provabs_tree** out);
provabs_status provabs_tree_from_file(const char* path, provabs_tree** out);
void provabs_tree_free(provabs_tree* tree);

provabs_status provabs_example_from_string(const char* text, provabs_example** out);
provabs_status provabs_example_from_file(const char* path, provabs_example** out);
void provabs_example_free(provabs_example* example);

/* Minimum-loss abstraction with privacy >= threshold (options: "threshold"). */
provabs_status provabs_optimize(const provabs_database* db, const provabs_tree* tree,
                                const provabs_example* example, const char* options_json,
                                char** report_json);

/* Maximum-privacy abstraction under a loss budget (options: "loiMax"). */
provabs_status provabs_dual(const provabs_database* db, const provabs_tree* tree,
                            const provabs_example* example, const char* options_json,
                            char** report_json);

/* Brute-force search over every abstraction; the correctness oracle. */
provabs_status provabs_oracle(const provabs_database* db, const provabs_tree* tree,
                              const provabs_example* example, const char* options_json,
                              char** report_json);

/* Privacy of a given (abstracted) example against a threshold. */
provabs_status provabs_privacy(const provabs_database* db, const provabs_tree* tree,
                               const provabs_example* example, const char* options_json,
                               char** report_json);

/* Loss of information of a given (abstracted) example. */
provabs_status provabs_loi(const provabs_database* db, const provabs_tree* tree,
                           const provabs_example* example, const char* options_json,
                           char** report_json);

/* Concretization count and (unless "countOnly") the enumerated set. */
provabs_status provabs_concretize(const provabs_database* db, const provabs_tree* tree,
                                  const provabs_example* example, const char* options_json,
                                  char** report_json);

/* Consistent connected candidate queries of a concrete example. */
provabs_status provabs_consistent(const provabs_database* db, const provabs_example* example,
                                  const char* options_json, char** report_json);

/* Synthetic workload; returns {"database","tree","example","query"} file texts. */
provabs_status provabs_generate(const char* spec_json, char** bundle_json);

/* Ablation sweep on one instance; returns CSV text. */
provabs_status provabs_bench(const provabs_database* db, const provabs_tree* tree,
                             const provabs_example* example, const char* options_json,
                             char** csv_text);

#ifdef __cplusplus
}
#endif

#endif /* PROVABS_H */

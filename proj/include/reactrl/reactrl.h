// Copyright 2026 The reactrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the reactrl simulator and trial server.
 *
 * Every function returns an rrl_status. On failure, rrl_last_error() gives a
 * message for the calling thread. Strings returned through `char**` are owned
 * by the caller and released with rrl_string_free. Config arguments are JSON
 * documents as text; NULL or "" selects the defaults. */

#ifndef REACTRL_REACTRL_H_
#define REACTRL_REACTRL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define RRL_API __attribute__((visibility("default")))
#else
#define RRL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rrl_status {
  RRL_OK = 0,
  RRL_INVALID_ARGUMENT = 1,
  RRL_INVALID_CONFIG = 2,
  RRL_INVALID_SCHEDULE = 3,
  RRL_CALLED_ON_WALL_CLOCK = 4,
  RRL_NON_MONOTONE_TIMESTAMP = 5,
  RRL_OBSERVED_AFTER_TERMINAL = 6,
  RRL_ACTION_AFTER_TERMINAL = 7,
  RRL_EMPTY_SAMPLE = 8,
  RRL_IO = 9,
  RRL_PARTICIPANT_DISCONNECTED = 10,
  RRL_NOT_FOUND = 11,
  RRL_RUNTIME = 12,
  RRL_INTERNAL = 99
} rrl_status;

typedef struct rrl_results rrl_results;
typedef struct rrl_server rrl_server;

RRL_API const char* rrl_version(void);
RRL_API const char* rrl_status_name(rrl_status status);
/* Message of the last failure on this thread, "" if none. */
RRL_API const char* rrl_last_error(void);
RRL_API void rrl_string_free(char* s);

/* Reads and parses a JSON config file; RRL_INVALID_CONFIG when missing or
 * malformed. The normalized document is returned as text. */
RRL_API rrl_status rrl_read_config_file(const char* path, char** out_json);

/* Delay sweep of the stop task in simulated time. */
RRL_API rrl_status rrl_run_experiment1(const char* config_json, uint64_t seed, rrl_results** out);
/* Press-to-stop experiment with scripted participants. */
RRL_API rrl_status rrl_run_experiment2(const char* config_json, uint64_t seed, rrl_results** out);
/* Repeated hallway episodes. `q_in_json` (nullable) seeds the Q-table; when
 * `q_out_json` is non-NULL it receives the trained table. */
RRL_API rrl_status rrl_run_hallway(const char* config_json, uint64_t seed, const char* q_in_json,
                           char** q_out_json, rrl_results** out);

/* Standard vs reactive on the synchronous grid. `*equal` is 1 when every
 * action, update and Q-table matched; the report is JSON. */
RRL_API rrl_status rrl_check_equivalence(const char* config_json, uint64_t seed, int* equal,
                                 char** report_json);

/* `format` is "csv" or "json". */
RRL_API rrl_status rrl_results_write(const rrl_results* r, const char* path, const char* format);
RRL_API rrl_status rrl_results_to_string(const rrl_results* r, const char* format, char** out);
/* CSV, or JSON when the path ends in .json. */
RRL_API rrl_status rrl_results_load(const char* path, rrl_results** out);
RRL_API rrl_status rrl_results_summary(const rrl_results* r, char** out_json);
RRL_API size_t rrl_results_row_count(const rrl_results* r);
RRL_API void rrl_results_free(rrl_results* r);

/* Prediction learners of 3.33 us that fit in `delay_us`. */
RRL_API int64_t rrl_demons_equivalent(int64_t delay_us);

/* Live trial server. `config_json` is an experiment-2 config. */
RRL_API rrl_status rrl_server_create(const char* config_json, uint64_t seed, rrl_server** out);
/* host NULL or port < 0 fall back to the config; port 0 picks a free port. */
RRL_API rrl_status rrl_server_bind(rrl_server* s, const char* host, int port, int* bound_port);
/* Blocks until rrl_server_stop. */
RRL_API rrl_status rrl_server_run(rrl_server* s);
/* Safe to call from any thread, including a signal-watching one. */
RRL_API rrl_status rrl_server_stop(rrl_server* s);
RRL_API void rrl_server_free(rrl_server* s);

#ifdef __cplusplus
}
#endif

#endif /* REACTRL_REACTRL_H_ */

// Copyright 2026 The Flow Authors
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

/* C interface to the Flow workflow engine.
 *
 * Every fallible call returns a flow_status; on failure flow_last_error()
 * holds a message for the calling thread until its next API call. Strings
 * returned through char** out-parameters are heap copies owned by the
 * caller and released with flow_string_free(). Handles are released with
 * their matching *_destroy(), which accepts NULL. */
#ifndef FLOW_FLOW_H_
#define FLOW_FLOW_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FLOW_BUILDING_LIBRARY)
#define FLOW_API __attribute__((visibility("default")))
#else
#define FLOW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum flow_status {
  FLOW_OK = 0,
  FLOW_ERR_INVALID_ARGUMENT = 1,
  FLOW_ERR_PARSE = 2,
  FLOW_ERR_VALIDATION = 3,
  FLOW_ERR_STATE = 4,
  FLOW_ERR_MISSING_KEY = 5,
  FLOW_ERR_PLANNING = 6,
  FLOW_ERR_TRANSPORT = 7,
  FLOW_ERR_PROTOCOL = 8,
  FLOW_ERR_AUTH = 9,
  FLOW_ERR_IO = 10,
  FLOW_ERR_INTERNAL = 99
} flow_status;

typedef enum flow_outcome {
  FLOW_OUTCOME_SUCCESS = 0,
  FLOW_OUTCOME_FAILURE = 1,
  FLOW_OUTCOME_BUDGET_EXHAUSTED = 2
} flow_outcome;

typedef struct flow_config flow_config;
typedef struct flow_workflow flow_workflow;
typedef struct flow_plan_result flow_plan_result;
typedef struct flow_run_report flow_run_report;
typedef struct flow_sim_report flow_sim_report;

typedef struct flow_metrics {
  double parallelism_avg;
  double dependency_complexity;
  size_t level_count;
  double mean_degree;
} flow_metrics;

FLOW_API const char* flow_version(void);
FLOW_API const char* flow_last_error(void);
FLOW_API const char* flow_status_name(flow_status status);
FLOW_API void flow_string_free(char* s);

/* Key/value settings, e.g. "planner"="mock", "k"="3", "mask"="C,D".
 * Dashes in keys are read as underscores. Unknown keys are rejected. */
FLOW_API flow_status flow_config_create(flow_config** out);
FLOW_API void flow_config_destroy(flow_config* config);
FLOW_API flow_status flow_config_set(flow_config* config, const char* key, const char* value);
/* FLOW_ERR_MISSING_KEY when the key is unset. */
FLOW_API flow_status flow_config_get(const flow_config* config, const char* key, char** out);
/* Effective settings as a JSON object with secrets redacted. */
FLOW_API flow_status flow_config_dump(const flow_config* config, char** out);

/* Workflow snapshots. Advisory problems (such as repaired counters) are
 * kept as warnings on the handle. */
FLOW_API flow_status flow_workflow_parse(const char* json, size_t len, flow_workflow** out);
FLOW_API void flow_workflow_destroy(flow_workflow* workflow);
FLOW_API size_t flow_workflow_size(const flow_workflow* workflow);
FLOW_API size_t flow_workflow_warning_count(const flow_workflow* workflow);
/* Borrowed pointer, valid while the handle lives; NULL when out of range. */
FLOW_API const char* flow_workflow_warning(const flow_workflow* workflow, size_t index);
FLOW_API flow_status flow_workflow_to_json(const flow_workflow* workflow, char** out);
FLOW_API flow_status flow_workflow_metrics(const flow_workflow* workflow, flow_metrics* out);
/* Level partition as a JSON array of sorted id arrays. */
FLOW_API flow_status flow_workflow_levels_json(const flow_workflow* workflow, char** out);

/* Generates config "k" candidates for the task text and selects one. */
FLOW_API flow_status flow_plan(const flow_config* config, const char* task,
                               flow_plan_result** out);
FLOW_API void flow_plan_result_destroy(flow_plan_result* plan);
FLOW_API size_t flow_plan_winner(const flow_plan_result* plan);
FLOW_API flow_status flow_plan_workflow_json(const flow_plan_result* plan, char** out);
FLOW_API flow_status flow_plan_selection_json(const flow_plan_result* plan, char** out);

/* Plans and executes. A run whose planning fails still yields a report
 * (flow_run_planning_failed() is nonzero); the call itself returns FLOW_OK
 * unless the inputs are unusable. */
FLOW_API flow_status flow_run(const flow_config* config, const char* task,
                              flow_run_report** out);
/* Executes a given workflow without initial planning. */
FLOW_API flow_status flow_run_workflow(const flow_config* config, const flow_workflow* workflow,
                                       const char* task, flow_run_report** out);
FLOW_API void flow_run_report_destroy(flow_run_report* report);
FLOW_API flow_outcome flow_run_outcome(const flow_run_report* report);
FLOW_API int flow_run_planning_failed(const flow_run_report* report);
FLOW_API int flow_run_refinement_rounds(const flow_run_report* report);
FLOW_API int flow_run_repair_rounds(const flow_run_report* report);
FLOW_API flow_status flow_run_log_jsonl(const flow_run_report* report, char** out);
FLOW_API flow_status flow_run_final_json(const flow_run_report* report, char** out);
FLOW_API flow_status flow_run_report_json(const flow_run_report* report, char** out);

/* Edge-addition experiment; reads n, p_f, pairs, trials, edge_prob, seed. */
FLOW_API flow_status flow_simulate_theorem1(const flow_config* config, flow_sim_report** out);
/* Masking ablation; reads seeds, seed, max_refinement_rounds, strategy. */
FLOW_API flow_status flow_simulate_ablation(const flow_config* config, flow_sim_report** out);
FLOW_API void flow_sim_report_destroy(flow_sim_report* report);
FLOW_API flow_status flow_sim_csv(const flow_sim_report* report, char** out);
FLOW_API flow_status flow_sim_summary(const flow_sim_report* report, char** out);
/* theorem1: pairs where E_rec[S_A] > E_rec[S_B] fails.
 * ablation: seeds that succeeded without refinement or failed with it. */
FLOW_API size_t flow_sim_violations(const flow_sim_report* report);

#ifdef __cplusplus
}
#endif

#endif /* FLOW_FLOW_H_ */

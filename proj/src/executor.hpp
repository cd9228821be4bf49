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

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "agents.hpp"
#include "fault_injector.hpp"
#include "llm_client.hpp"
#include "planner.hpp"
#include "run_log.hpp"
#include "workflow_state.hpp"

namespace flow {

enum class UpdateStrategy { kConcurrentUpdate, kBatchUpdate };
const char* strategy_token(UpdateStrategy s);
std::optional<UpdateStrategy> parse_strategy(const std::string& token);

struct ExecutorConfig {
  UpdateStrategy strategy = UpdateStrategy::kBatchUpdate;
  std::size_t max_concurrent = 8;
  int max_refinement_rounds = 10;
  bool verify_completions = true;

  void validate() const;  // throws InvalidArgument
};

enum class Outcome { kSuccess, kFailure, kBudgetExhausted };
const char* outcome_token(Outcome o);

struct RunReport {
  WorkflowState final_state;
  Outcome outcome = Outcome::kFailure;
  RunLog log;
  int refinement_rounds_used = 0;
  int repair_rounds = 0;  // update rounds taken while a subtask had failed
  std::chrono::milliseconds wall_time{0};
  llm::TokenUsage token_usage;
  bool planning_failed = false;
  std::string diagnosis;
  std::optional<SelectionReport> selection;

  nlohmann::json to_json() const;
};

struct RunOptions {
  std::optional<FaultInjector> injector;
  // Recorded in the detail of the "planned" event.
  std::string config_echo;
  // Reads cumulative token usage at the end of the run.
  std::function<llm::TokenUsage()> usage_probe;
};

// Clone assignment for one dispatch wave. Ready subtasks sharing a role get
// clone indices in id order, skipping indices of instances still `live`.
// Ids whose record has no agent are reported in `errors` and left out.
struct Allocation {
  std::map<SubtaskId, AgentInstance> assigned;
  std::map<SubtaskId, std::string> errors;
};
Allocation allocate_agents(const std::vector<SubtaskId>& ready, const WorkflowState& state,
                           const std::map<std::string, std::string>& personas = {},
                           const std::set<std::pair<std::string, std::size_t>>& live = {});

// Runs one subtask through the backend with its parents' outputs.
std::string execute_subtask(AgentBackend& backend, const AgentInstance& instance,
                            const std::string& goal, const SubtaskId& id,
                            const SubtaskRecord& record, const std::vector<Upstream>& upstream);

// Parents' data, by parent id. All parents must be completed.
std::vector<Upstream> collect_upstream(const WorkflowState& state, const SubtaskId& id);

// Plans, then executes ready subtasks concurrently while refining the
// workflow through the planner, until every subtask has completed or the
// refinement budget runs out with failures left.
RunReport run(const TaskSpec& task, Planner& planner, AgentBackend& agents,
              const PlannerConfig& planner_config, const ExecutorConfig& config,
              const RunOptions& options = {});

// Same loop over an already chosen workflow.
RunReport run_workflow(const TaskSpec& task, WorkflowState initial, Planner& planner,
                       AgentBackend& agents, const PlannerConfig& planner_config,
                       const ExecutorConfig& config, const RunOptions& options = {});

}  // namespace flow

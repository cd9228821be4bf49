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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aov_graph.hpp"
#include "prompts.hpp"
#include "workflow_state.hpp"

namespace flow {

struct TaskSpec {
  std::string requirement;               // passed verbatim into every prompt
  std::vector<std::string> constraints;  // role restrictions, optional
};

struct PlannerConfig {
  int k = 3;
  double temperature = 0.7;
  double verify_temperature = 0.0;
  int max_parse_retries = 2;
  std::size_t context_budget = 24'000;  // characters of serialized state

  void validate() const;  // throws InvalidArgument
};

struct Candidates {
  std::vector<AovGraph> graphs;
};
struct NoChange {};
struct Verdict {
  bool pass = true;
  std::string rationale;
};

using PlannerResponse = std::variant<Candidates, StructuralUpdate, NoChange, Verdict>;

enum class ResponseContext { kInitial, kUpdate };

std::string build_init_prompt(const TaskSpec& task, const PlannerConfig& config,
                              const prompts::Templates& templates = prompts::Templates::defaults());

// Serialized state goes in whole unless it exceeds config.context_budget, in
// which case completed data payloads are replaced by a truncation marker,
// oldest completion first, until it fits.
std::string build_update_prompt(const TaskSpec& task, const WorkflowState& state,
                                const PlannerConfig& config = {},
                                const prompts::Templates& templates = prompts::Templates::defaults());

std::string build_verify_prompt(const TaskSpec& task, const SubtaskId& id,
                                const SubtaskRecord& record,
                                const prompts::Templates& templates = prompts::Templates::defaults());

inline constexpr const char* kTruncationMarker = "[truncated]";

// Finds the first JSON object in free text (fenced or not), applies the key
// shim and checks the structure. In the update context "{}" is NoChange.
// Throws ParseError whose message is a diagnosis fit for a retry prompt.
PlannerResponse parse_workflow_response(std::string_view text, ResponseContext context,
                                        std::vector<std::string>* warnings = nullptr);

// Leading YES/NO token decides; throws ParseError when there is neither.
Verdict parse_verdict(std::string_view text);

// Raw planner: exchanges text. The functions below do prompt handling,
// parsing and selection. Implementations must tolerate concurrent calls.
class Planner {
 public:
  virtual ~Planner() = default;

  // `feedback` is empty on the first attempt, else the diagnosis of the
  // previous unusable response for this sample.
  virtual std::string initial_response(const TaskSpec& task, const PlannerConfig& config,
                                       int sample, const std::string& feedback) = 0;
  virtual std::string update_response(const TaskSpec& task, const WorkflowState& state,
                                      const PlannerConfig& config, int sample) = 0;
  // May throw TransportError/ProtocolError/AuthError when unreachable.
  virtual std::string verify_response(const TaskSpec& task, const SubtaskId& id,
                                      const SubtaskRecord& record,
                                      const PlannerConfig& config) = 0;
};

struct InitialPlan {
  AovGraph selected;
  std::vector<std::optional<AovGraph>> candidates;  // one slot per request
  SelectionReport selection;                        // indices match candidates
  std::vector<std::string> warnings;
};

// Issues config.k requests (each retried up to max_parse_retries), drops the
// unusable ones and selects. Throws PlanningError when none is usable.
InitialPlan plan_initial(Planner& planner, const TaskSpec& task, const PlannerConfig& config);

struct UpdateDecision {
  PlannerResponse response = NoChange{};  // StructuralUpdate or NoChange
  std::size_t requests = 0;
  std::size_t successors = 0;  // valid, non-empty proposals
  bool forced_repair = false;
  std::optional<SelectionReport> selection;  // index 0 is the current graph unless forced
  std::vector<std::string> warnings;

  bool changes() const { return std::holds_alternative<StructuralUpdate>(response); }
};

// Issues config.k update requests, merges each proposal into a copy of the
// state and selects among the current graph and the successors. While any
// subtask has failed the current graph is not eligible, so a repair wins.
UpdateDecision propose_update(Planner& planner, const TaskSpec& task, const WorkflowState& state,
                              const PlannerConfig& config);

// An unreachable planner or unreadable verdict counts as a pass (warned).
Verdict verify_completion(Planner& planner, const TaskSpec& task, const SubtaskId& id,
                          const SubtaskRecord& record, const PlannerConfig& config);

nlohmann::json selection_to_json(const SelectionReport& report);

}  // namespace flow

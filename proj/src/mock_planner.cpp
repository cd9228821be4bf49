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

#include "mock_planner.hpp"

#include <json.hpp>

#include "errors.hpp"
#include "fixtures.hpp"

namespace flow {

MockPlanner::MockPlanner(std::vector<std::string> initial_fixtures)
    : fixtures_(std::move(initial_fixtures)) {
  if (fixtures_.empty()) throw InvalidArgument("mock planner needs at least one fixture");
}

MockPlanner MockPlanner::with_default_fixtures() {
  return MockPlanner(fixtures::default_candidate_texts());
}

std::string MockPlanner::initial_response(const TaskSpec&, const PlannerConfig&, int sample,
                                          const std::string&) {
  return fixtures_[static_cast<std::size_t>(sample) % fixtures_.size()];
}

StructuralUpdate mock_repair(const WorkflowState& state) {
  StructuralUpdate update;
  if (state.count(SubtaskStatus::kFailed) == 0) return update;
  for (const auto& [id, rec] : state.records())
    update.tasks[id] = {rec.requirement, rec.children, rec.agent, rec.status};

  for (const auto& [id, rec] : state.records()) {
    if (rec.status != SubtaskStatus::kFailed) continue;
    auto& failed = update.tasks[id];
    failed.status = SubtaskStatus::kNotStarted;
    if (rec.children.empty()) continue;
    SubtaskId bridge = id + "_bridge";
    for (int n = 2; update.tasks.count(bridge); ++n) bridge = id + "_bridge" + std::to_string(n);
    update.tasks[bridge] = {
        "Check the output of " + id + " against its requirement and adapt it for " +
            "the subtasks that depend on it",
        rec.children, rec.agent, SubtaskStatus::kNotStarted};
    update.tasks[id].children = {bridge};
  }
  return update;
}

std::string update_text(const StructuralUpdate& update) {
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [id, rec] : update.tasks) {
    tasks[id] = {{"requirement", rec.requirement},
                 {"status", status_token(rec.status.value_or(SubtaskStatus::kNotStarted))},
                 {"child", rec.children},
                 {"agent", rec.agent}};
  }
  return tasks.dump(2);
}

std::string MockPlanner::update_response(const TaskSpec&, const WorkflowState& state,
                                         const PlannerConfig&, int) {
  auto repair = mock_repair(state);
  return repair.empty() ? "{}" : "```json\n" + update_text(repair) + "\n```";
}

std::string MockPlanner::verify_response(const TaskSpec&, const SubtaskId& id,
                                         const SubtaskRecord& record, const PlannerConfig&) {
  if (!record.data) return "NO: subtask " + id + " produced no output";
  if (*record.data == "none") return "NO: subtask " + id + " output is the sentinel 'none'";
  return "YES: output present for " + id;
}

}  // namespace flow

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

#include <string>
#include <vector>

#include "planner.hpp"

namespace flow {

// Deterministic planner for desk-scale runs.
//
// Initial requests return the fixture texts in turn (sample i gets fixture
// i mod count). Update requests return "{}" unless a subtask has failed; then
// each failed subtask is re-queued and, when it has children, a bridging
// subtask is inserted between it and them. Verification passes iff the
// output exists and is not the sentinel "none".
class MockPlanner : public Planner {
 public:
  explicit MockPlanner(std::vector<std::string> initial_fixtures);
  static MockPlanner with_default_fixtures();

  std::string initial_response(const TaskSpec& task, const PlannerConfig& config, int sample,
                               const std::string& feedback) override;
  std::string update_response(const TaskSpec& task, const WorkflowState& state,
                              const PlannerConfig& config, int sample) override;
  std::string verify_response(const TaskSpec& task, const SubtaskId& id,
                              const SubtaskRecord& record, const PlannerConfig& config) override;

 private:
  std::vector<std::string> fixtures_;
};

// The repair proposal MockPlanner returns for `state`, or an empty update
// when nothing has failed.
StructuralUpdate mock_repair(const WorkflowState& state);

// Update-response text for a proposal: the snapshot task map without data.
std::string update_text(const StructuralUpdate& update);

}  // namespace flow

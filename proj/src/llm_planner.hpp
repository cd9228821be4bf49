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

#include <memory>

#include "llm_client.hpp"
#include "planner.hpp"
#include "prompts.hpp"

namespace flow {

// Planner backed by a chat-completions endpoint.
class LlmPlanner : public Planner {
 public:
  LlmPlanner(std::shared_ptr<llm::Client> client,
             prompts::Templates templates = prompts::Templates::defaults());

  std::string initial_response(const TaskSpec& task, const PlannerConfig& config, int sample,
                               const std::string& feedback) override;
  std::string update_response(const TaskSpec& task, const WorkflowState& state,
                              const PlannerConfig& config, int sample) override;
  std::string verify_response(const TaskSpec& task, const SubtaskId& id,
                              const SubtaskRecord& record, const PlannerConfig& config) override;

 private:
  std::string ask(std::string prompt, double temperature);

  std::shared_ptr<llm::Client> client_;
  prompts::Templates templates_;
};

}  // namespace flow

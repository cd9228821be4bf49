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

#include "llm_planner.hpp"

namespace flow {

LlmPlanner::LlmPlanner(std::shared_ptr<llm::Client> client, prompts::Templates templates)
    : client_(std::move(client)), templates_(std::move(templates)) {}

std::string LlmPlanner::ask(std::string prompt, double temperature) {
  llm::CompletionRequest request;
  request.messages.push_back({llm::Role::kUser, std::move(prompt)});
  request.temperature = temperature;
  return client_->complete(request).content;
}

std::string LlmPlanner::initial_response(const TaskSpec& task, const PlannerConfig& config,
                                         int, const std::string& feedback) {
  auto prompt = build_init_prompt(task, config, templates_);
  if (!feedback.empty())
    prompt += "\n\nYour previous response could not be used (" + feedback +
              "). Reply with only the JSON object.";
  return ask(std::move(prompt), config.temperature);
}

std::string LlmPlanner::update_response(const TaskSpec& task, const WorkflowState& state,
                                        const PlannerConfig& config, int) {
  return ask(build_update_prompt(task, state, config, templates_), config.temperature);
}

std::string LlmPlanner::verify_response(const TaskSpec& task, const SubtaskId& id,
                                        const SubtaskRecord& record,
                                        const PlannerConfig& config) {
  return ask(build_verify_prompt(task, id, record, templates_), config.verify_temperature);
}

}  // namespace flow

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

#include "agents.hpp"

#include <cstdint>
#include <cstdio>
#include <thread>

#include "errors.hpp"

namespace flow {

std::string format_upstream(const std::vector<Upstream>& upstream) {
  std::string out;
  for (const auto& u : upstream) out += "[" + u.parent + "]\n" + u.data + "\n";
  return out;
}

std::string upstream_digest(const std::vector<Upstream>& upstream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_upstream(upstream)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StubBackend::StubBackend(std::chrono::milliseconds latency) : latency_(latency) {}

void StubBackend::set_latency(const SubtaskId& id, std::chrono::milliseconds latency) {
  per_id_[id] = latency;
}

std::string StubBackend::execute(const AgentInstance&, const std::string&, const SubtaskId& id,
                                 const SubtaskRecord&, const std::vector<Upstream>& upstream) {
  auto it = per_id_.find(id);
  auto delay = it == per_id_.end() ? latency_ : it->second;
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
  if (unreachable_.count(id)) throw TransportError("stub backend unreachable for " + id);
  std::string out = "done(" + id + ")";
  if (!upstream.empty()) out += " upstream=" + upstream_digest(upstream);
  return out;
}

std::vector<llm::ChatMessage> build_agent_messages(const AgentInstance& agent,
                                                   const std::string& persona,
                                                   const std::string& goal, const SubtaskId& id,
                                                   const SubtaskRecord& record,
                                                   const std::vector<Upstream>& upstream,
                                                   const prompts::Templates& templates) {
  std::string system = persona.empty()
                           ? "You are " + agent.role.name +
                                 ", an agent in a multi-agent workflow. Complete the subtask "
                                 "you are given."
                           : persona;
  std::string user = prompts::render(
      templates.agent, {{"task", goal},
                        {"subtask", id},
                        {"requirement", record.requirement},
                        {"upstream", upstream.empty() ? "(none)" : format_upstream(upstream)}});
  return {{llm::Role::kSystem, std::move(system)}, {llm::Role::kUser, std::move(user)}};
}

LlmAgentBackend::LlmAgentBackend(std::shared_ptr<llm::Client> client,
                                 std::map<std::string, std::string> personas,
                                 prompts::Templates templates, double temperature)
    : client_(std::move(client)),
      personas_(std::move(personas)),
      templates_(std::move(templates)),
      temperature_(temperature) {}

std::string LlmAgentBackend::execute(const AgentInstance& agent, const std::string& goal,
                                     const SubtaskId& id, const SubtaskRecord& record,
                                     const std::vector<Upstream>& upstream) {
  std::string persona = agent.role.persona;
  if (auto it = personas_.find(agent.role.name); persona.empty() && it != personas_.end())
    persona = it->second;
  llm::CompletionRequest request;
  request.messages =
      build_agent_messages(agent, persona, goal, id, record, upstream, templates_);
  request.temperature = temperature_;
  return client_->complete(request).content;
}

}  // namespace flow

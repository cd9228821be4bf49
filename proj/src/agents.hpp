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
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "aov_graph.hpp"
#include "llm_client.hpp"
#include "prompts.hpp"
#include "workflow_state.hpp"

namespace flow {

struct AgentInstance {
  AgentRole role;
  std::size_t clone_index = 0;  // 0 is the original

  std::string label() const { return role.name + "#" + std::to_string(clone_index); }
  bool operator==(const AgentInstance&) const = default;
};

struct Upstream {
  SubtaskId parent;
  std::string data;
};

// Parent outputs labeled by id, in the given order:
//   [A]
//   <data of A>
std::string format_upstream(const std::vector<Upstream>& upstream);

// FNV-1a 64 of format_upstream(upstream), as 16 hex digits.
std::string upstream_digest(const std::vector<Upstream>& upstream);

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  // Throws (TransportError, ProtocolError, ...) when the subtask cannot run.
  virtual std::string execute(const AgentInstance& agent, const std::string& goal,
                              const SubtaskId& id, const SubtaskRecord& record,
                              const std::vector<Upstream>& upstream) = 0;
};

// Deterministic backend: "done(<id>)", plus " upstream=<digest>" when the
// subtask has parents. Sleeps for the configured latency first.
class StubBackend : public AgentBackend {
 public:
  explicit StubBackend(std::chrono::milliseconds latency = std::chrono::milliseconds{0});

  void set_latency(const SubtaskId& id, std::chrono::milliseconds latency);
  // Subtasks in this set throw TransportError instead of answering.
  void set_unreachable(std::set<SubtaskId> ids) { unreachable_ = std::move(ids); }

  std::string execute(const AgentInstance& agent, const std::string& goal, const SubtaskId& id,
                      const SubtaskRecord& record,
                      const std::vector<Upstream>& upstream) override;

 private:
  std::chrono::milliseconds latency_;
  std::map<SubtaskId, std::chrono::milliseconds> per_id_;
  std::set<SubtaskId> unreachable_;
};

class LlmAgentBackend : public AgentBackend {
 public:
  // `personas` maps role names to system prompts; roles without one get a
  // generic system message.
  LlmAgentBackend(std::shared_ptr<llm::Client> client,
                  std::map<std::string, std::string> personas = {},
                  prompts::Templates templates = prompts::Templates::defaults(),
                  double temperature = 0.7);

  std::string execute(const AgentInstance& agent, const std::string& goal, const SubtaskId& id,
                      const SubtaskRecord& record,
                      const std::vector<Upstream>& upstream) override;

 private:
  std::shared_ptr<llm::Client> client_;
  std::map<std::string, std::string> personas_;
  prompts::Templates templates_;
  double temperature_;
};

std::vector<llm::ChatMessage> build_agent_messages(const AgentInstance& agent,
                                                   const std::string& persona,
                                                   const std::string& goal, const SubtaskId& id,
                                                   const SubtaskRecord& record,
                                                   const std::vector<Upstream>& upstream,
                                                   const prompts::Templates& templates);

}  // namespace flow

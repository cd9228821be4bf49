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

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agents.hpp"
#include "executor.hpp"
#include "fault_injector.hpp"
#include "llm_client.hpp"
#include "planner.hpp"

namespace flow {

// Flat string settings shared by the C API and the command line. Keys use
// underscores; dashes are accepted and normalized. Unset keys fall back to
// the defaults of the typed config they feed.
class EngineOptions {
 public:
  // Throws InvalidArgument for unknown keys.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const { return get(key).has_value(); }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Effective settings as JSON, secrets replaced by "***".
  std::string dump() const;
  // Explicit settings plus the typed planner/executor/provider values they
  // resolve to, secrets redacted.
  std::string effective_dump() const;

  static const std::vector<std::string>& known_keys();
  static std::string normalize_key(const std::string& key);

  // Typed views; each throws InvalidArgument on malformed values.
  std::string planner_kind() const;  // "mock" | "llm"
  std::string agents_kind() const;   // "stub" | "llm"
  PlannerConfig planner_config() const;
  ExecutorConfig executor_config() const;
  std::optional<FaultInjector> injector() const;
  llm::ProviderConfig provider_config() const;
  std::uint64_t seed() const;

  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

// Planner and agent backend built from options.
struct Engine {
  std::shared_ptr<llm::Client> client;  // set when either side uses the provider
  std::unique_ptr<Planner> planner;
  std::unique_ptr<AgentBackend> agents;
  std::function<llm::TokenUsage()> usage_probe;
};

Engine build_engine(const EngineOptions& options);

RunOptions run_options(const EngineOptions& options);

}  // namespace flow

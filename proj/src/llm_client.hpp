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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace flow::llm {

enum class Role { kSystem, kUser, kAssistant };
const char* role_token(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_tokens = 4096;
  std::string model;  // empty: use the provider default
};

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4o-mini";
  std::chrono::milliseconds timeout{120'000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{1'000};
  double backoff_factor = 2.0;
  std::uint64_t jitter_seed = 0x5eed;

  // FLOW_API_KEY, FLOW_API_BASE, FLOW_MODEL over the defaults above.
  static ProviderConfig from_env();
  // Throws InvalidArgument.
  void validate() const;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    total_tokens += o.total_tokens;
    return *this;
  }
};

struct CompletionResult {
  std::string content;
  TokenUsage usage;
  int attempts = 0;
};

// Serialized chat-completions request body, exactly as sent.
std::string request_body(const CompletionRequest& request, const std::string& model);

struct ParsedUrl {
  std::string scheme_host_port;  // "https://host:port"
  std::string path_prefix;       // "/v1", no trailing slash
};
ParsedUrl parse_base_url(const std::string& base_url);

// Minimal OpenAI-compatible chat-completions client. Safe for concurrent
// calls; at most `max_in_flight` requests are outstanding at once.
class Client {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit Client(ProviderConfig config, std::size_t max_in_flight = 8);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  // Retries transport errors, 429 and 5xx with full-jitter exponential
  // backoff. Throws AuthError (401/403), ProtocolError (other 4xx, bad body),
  // TransportError (retries exhausted).
  CompletionResult complete(const CompletionRequest& request);

  TokenUsage usage() const;
  const ProviderConfig& config() const { return config_; }
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

 private:
  struct Limiter;

  std::chrono::milliseconds backoff_delay(int retry_index);

  ProviderConfig config_;
  ParsedUrl url_;
  std::unique_ptr<Limiter> limiter_;
  Sleeper sleeper_;
  mutable std::mutex mu_;
  TokenUsage usage_;
  std::uint64_t jitter_state_;
};

}  // namespace flow::llm

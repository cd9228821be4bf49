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

#include "llm_client.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <random>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "errors.hpp"
#include "log.hpp"

namespace flow::llm {

using nlohmann::json;

const char* role_token(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig c;
  if (const char* v = std::getenv("FLOW_API_KEY")) c.api_key = v;
  if (const char* v = std::getenv("FLOW_API_BASE"); v && *v) c.base_url = v;
  if (const char* v = std::getenv("FLOW_MODEL"); v && *v) c.model = v;
  return c;
}

ParsedUrl parse_base_url(const std::string& base_url) {
  static const std::regex re(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(:[0-9]{1,5})?(/[^?#]*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, re))
    throw InvalidArgument("malformed base_url '" + base_url + "'");
  ParsedUrl out;
  out.scheme_host_port = m[1].str() + "://" + m[2].str() + m[3].str();
  out.path_prefix = m[4].str();
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
    out.path_prefix.pop_back();
  return out;
}

void ProviderConfig::validate() const {
  parse_base_url(base_url);
  if (max_attempts < 1) throw InvalidArgument("retry attempts must be >= 1");
  if (model.empty()) throw InvalidArgument("model must be set");
  if (timeout.count() <= 0) throw InvalidArgument("timeout must be positive");
}

std::string request_body(const CompletionRequest& request, const std::string& model) {
  json messages = json::array();
  for (const auto& m : request.messages)
    messages.push_back({{"role", role_token(m.role)}, {"content", m.content}});
  json body = {
      {"model", model},
      {"messages", std::move(messages)},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  return body.dump();
}

struct Client::Limiter {
  explicit Limiter(std::size_t n) : available(n) {}
  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }
  std::mutex mu;
  std::condition_variable cv;
  std::size_t available;
};

Client::Client(ProviderConfig config, std::size_t max_in_flight)
    : config_(std::move(config)),
      url_(parse_base_url(config_.base_url)),
      limiter_(std::make_unique<Limiter>(max_in_flight == 0 ? 1 : max_in_flight)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      jitter_state_(config_.jitter_seed) {
  config_.validate();
  log::register_secret(config_.api_key);
}

Client::~Client() = default;

TokenUsage Client::usage() const {
  std::lock_guard lock(mu_);
  return usage_;
}

std::chrono::milliseconds Client::backoff_delay(int retry_index) {
  const double cap = static_cast<double>(config_.backoff_base.count()) *
                     std::pow(config_.backoff_factor, retry_index);
  std::uint64_t draw;
  {
    std::lock_guard lock(mu_);
    std::mt19937_64 rng(jitter_state_);
    draw = rng();
    jitter_state_ = rng();
  }
  const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
  return std::chrono::milliseconds(static_cast<std::int64_t>(u * cap));
}

namespace {

CompletionResult parse_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProtocolError("provider returned a non-JSON body");
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty())
    throw ProtocolError("provider response has no choices");
  const auto& first = doc["choices"][0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string())
    throw ProtocolError("provider response choice has no message content");
  CompletionResult out;
  out.content = first["message"]["content"].get<std::string>();
  if (auto it = doc.find("usage"); it != doc.end() && it->is_object()) {
    out.usage.prompt_tokens = it->value("prompt_tokens", 0);
    out.usage.completion_tokens = it->value("completion_tokens", 0);
    out.usage.total_tokens =
        it->value("total_tokens", out.usage.prompt_tokens + out.usage.completion_tokens);
  }
  return out;
}

}  // namespace

CompletionResult Client::complete(const CompletionRequest& request) {
  if (request.messages.empty()) throw InvalidArgument("completion request has no messages");
  const std::string model = request.model.empty() ? config_.model : request.model;
  const std::string body = request_body(request, model);
  const std::string path = url_.path_prefix + "/chat/completions";

  limiter_->acquire();
  struct Release {
    Limiter* l;
    ~Release() { l->release(); }
  } release{limiter_.get()};

  std::string last_failure;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) sleeper_(backoff_delay(attempt - 2));

    httplib::Client http(url_.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.timeout - secs);
    http.set_connection_timeout(secs.count(), usecs.count());
    http.set_read_timeout(secs.count(), usecs.count());
    http.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

    log::debug("llm: POST " + url_.scheme_host_port + path + " attempt " +
               std::to_string(attempt));
    auto res = http.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      log::warn("llm: attempt " + std::to_string(attempt) + " failed: " + last_failure);
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
      auto out = parse_response(res->body);
      out.attempts = attempt;
      {
        std::lock_guard lock(mu_);
        usage_ += out.usage;
      }
      log::debug("llm: success after " + std::to_string(attempt) + " attempt(s)");
      return out;
    }
    if (status == 429 || status >= 500) {
      last_failure = "HTTP " + std::to_string(status);
      log::warn("llm: attempt " + std::to_string(attempt) + " got " + last_failure +
                ", retrying");
      continue;
    }
    if (status == 401 || status == 403)
      throw AuthError("provider rejected credentials (HTTP " + std::to_string(status) + ")");
    throw ProtocolError("provider returned HTTP " + std::to_string(status));
  }
  throw TransportError("retries exhausted after " + std::to_string(config_.max_attempts) +
                       " attempt(s): " + last_failure);
}

}  // namespace flow::llm

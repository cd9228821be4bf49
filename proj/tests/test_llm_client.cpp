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

#include <doctest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "engine_options.hpp"
#include "errors.hpp"
#include "executor.hpp"
#include "fixtures.hpp"
#include "llm_client.hpp"
#include "llm_planner.hpp"
#include "log.hpp"
#include "stub_server.hpp"

using namespace flow;
using namespace flow::llm;
using namespace std::chrono_literals;
using flow::testing::kSecret;
using flow::testing::LogCapture;
using flow::testing::StubServer;

namespace {

ProviderConfig config_for(const StubServer& s) {
  ProviderConfig c;
  c.base_url = s.base();
  c.api_key = kSecret;
  c.model = "test-model";
  c.timeout = 5s;
  c.backoff_base = 1ms;
  return c;
}

CompletionRequest hello() {
  CompletionRequest r;
  r.messages = {{Role::kUser, "hi"}};
  return r;
}

}  // namespace

TEST_CASE("request body is the chat-completions schema, byte for byte") {
  CompletionRequest r;
  r.messages = {{Role::kSystem, "be brief"}, {Role::kUser, "say \"hi\"\n"}};
  r.temperature = 0.7;
  r.max_tokens = 256;
  CHECK(request_body(r, "gpt-x") ==
        R"({"max_tokens":256,"messages":[{"content":"be brief","role":"system"},)"
        R"({"content":"say \"hi\"\n","role":"user"}],"model":"gpt-x","temperature":0.7})");
}

TEST_CASE("base url parsing") {
  auto u = parse_base_url("https://api.openai.com/v1/");
  CHECK(u.scheme_host_port == "https://api.openai.com");
  CHECK(u.path_prefix == "/v1");
  CHECK(parse_base_url("http://localhost:8080").path_prefix.empty());
  CHECK_THROWS_AS(parse_base_url("ftp://x"), InvalidArgument);
  CHECK_THROWS_AS(parse_base_url("not a url"), InvalidArgument);
}

TEST_CASE("successful call sends the exact body and auth header") {
  StubServer s;
  Client c(config_for(s));
  auto out = c.complete(hello());
  CHECK(out.content == "hello");
  CHECK(out.attempts == 1);
  CHECK(out.usage.total_tokens == 10);
  CHECK(c.usage().prompt_tokens == 7);
  REQUIRE(s.bodies().size() == 1);
  CHECK(s.bodies()[0] ==
        R"({"max_tokens":4096,"messages":[{"content":"hi","role":"user"}],"model":"test-model","temperature":0.7})");
  CHECK(s.auth()[0] == std::string("Bearer ") + kSecret);
  CHECK(s.content_types()[0] == "application/json");
}

TEST_CASE("429 and 5xx are retried with bounded backoff") {
  StubServer s;
  s.script = {429, 503, 200};
  Client c(config_for(s));
  std::vector<std::chrono::milliseconds> sleeps;
  c.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  auto out = c.complete(hello());
  CHECK(out.attempts == 3);
  CHECK(s.hits() == 3);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] <= 1ms);
  CHECK(sleeps[1] <= 2ms);
}

TEST_CASE("backoff cap grows geometrically") {
  StubServer s;
  s.script = {500, 500, 500, 500};
  auto cfg = config_for(s);
  cfg.backoff_base = 100ms;
  cfg.max_attempts = 4;
  Client c(cfg);
  std::vector<std::chrono::milliseconds> sleeps;
  c.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  CHECK_THROWS_AS(c.complete(hello()), TransportError);
  CHECK(s.hits() == 4);
  REQUIRE(sleeps.size() == 3);
  CHECK(sleeps[0] <= 100ms);
  CHECK(sleeps[1] <= 200ms);
  CHECK(sleeps[2] <= 400ms);
}

TEST_CASE("401 is not retried and other 4xx are protocol errors") {
  StubServer s;
  s.script = {401};
  Client c(config_for(s));
  c.set_sleeper([](std::chrono::milliseconds) { FAIL("no retry expected"); });
  CHECK_THROWS_AS(c.complete(hello()), AuthError);
  CHECK(s.hits() == 1);

  StubServer s2;
  s2.script = {400};
  Client c2(config_for(s2));
  CHECK_THROWS_AS(c2.complete(hello()), ProtocolError);
  CHECK(s2.hits() == 1);
}

TEST_CASE("unreachable provider surfaces a transport error") {
  ProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.max_attempts = 2;
  cfg.backoff_base = 1ms;
  cfg.timeout = 1s;
  Client c(cfg);
  CHECK_THROWS_AS(c.complete(hello()), TransportError);
}

TEST_CASE("the api key never reaches the logs") {
  LogCapture capture;
  {
    StubServer s;
    s.script = {500, 401};
    Client c(config_for(s));
    c.set_sleeper([](std::chrono::milliseconds) {});
    try {
      c.complete(hello());
    } catch (const AuthError& e) {
      CHECK(std::string(e.what()).find(kSecret) == std::string::npos);
    }
  }
  log::warn(std::string("echo of ") + kSecret);
  std::lock_guard lock(capture.mu);
  CHECK(capture.lines.size() >= 3);
  for (const auto& line : capture.lines) CHECK(line.find(kSecret) == std::string::npos);
  CHECK(capture.lines.back().find("***") != std::string::npos);
}

TEST_CASE("options dumps redact the key") {
  EngineOptions o;
  o.set("api-key", kSecret);
  o.set("planner", "llm");
  o.set("api_base", "http://127.0.0.1:9/v1");
  CHECK(o.dump().find(kSecret) == std::string::npos);
  CHECK(o.effective_dump().find(kSecret) == std::string::npos);
}

TEST_CASE("in-flight requests are capped") {
  StubServer s;
  std::atomic<int> live{0}, peak{0};
  s.reply = [&](const nlohmann::json&) {
    int now = ++live;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(30ms);
    --live;
    return std::string("ok");
  };
  auto c = std::make_shared<Client>(config_for(s), 2);
  std::vector<std::thread> ts;
  for (int i = 0; i < 6; ++i) ts.emplace_back([&] { c->complete(hello()); });
  for (auto& t : ts) t.join();
  CHECK(s.hits() == 6);
  CHECK(peak.load() <= 2);
}

TEST_CASE("end to end through the provider protocol") {
  StubServer s;
  const auto w1 = fixtures::candidate_text(fixtures::workflow1(), "goal");
  s.reply = [&](const nlohmann::json& body) -> std::string {
    const auto& msgs = body["messages"];
    const auto text = msgs.back()["content"].get<std::string>();
    if (text.rfind("You are an intelligent workflow planner", 0) == 0) return "```json\n" + w1 + "```";
    if (text.rfind("You are an intelligent workflow updater", 0) == 0) return "{}";
    if (text.find("Answer with YES or NO") != std::string::npos) return "YES - complete";
    return "agent output";
  };
  auto client = std::make_shared<Client>(config_for(s));
  LlmPlanner planner(client);
  LlmAgentBackend agents(client);
  PlannerConfig pcfg;
  ExecutorConfig ecfg;
  RunOptions opts;
  opts.usage_probe = [client] { return client->usage(); };
  auto r = run({"Build the thing", {}}, planner, agents, pcfg, ecfg, opts);
  CHECK(r.outcome == Outcome::kSuccess);
  CHECK(r.final_state.at("D").data == std::string("agent output"));
  CHECK(r.token_usage.total_tokens == static_cast<std::int64_t>(10 * s.hits()));
  // Agent prompts carry a system persona and the upstream outputs.
  bool saw_upstream = false;
  for (const auto& b : s.bodies()) {
    auto j = nlohmann::json::parse(b);
    if (j["messages"].size() == 2 &&
        j["messages"][1]["content"].get<std::string>().find("[A]\nagent output") != std::string::npos)
      saw_upstream = true;
  }
  CHECK(saw_upstream);
}

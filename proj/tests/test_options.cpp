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

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cli_config.hpp"
#include "engine_options.hpp"
#include "errors.hpp"
#include "fault_injector.hpp"
#include "run_log.hpp"

using namespace flow;

TEST_CASE("event tokens round trip") {
  for (int k = 0; k <= static_cast<int>(EventKind::kDone); ++k) {
    auto kind = static_cast<EventKind>(k);
    auto back = parse_event_token(event_token(kind));
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK_FALSE(parse_event_token("exploded").has_value());
}

TEST_CASE("run log jsonl keeps key order and round trips") {
  RunLog log;
  log.append(EventKind::kPlanned, 0, std::nullopt, std::nullopt, "3 candidates");
  log.append(EventKind::kDispatched, 1, "A", "writer#0", "wave 1, attempt 0");
  log.append(EventKind::kCompleted, 1, "A", "writer#0", "line\nbreak \"quoted\"");
  auto text = log.to_jsonl();
  std::vector<std::string> lines;
  for (std::size_t pos = 0, nl; (nl = text.find('\n', pos)) != std::string::npos; pos = nl + 1)
    lines.push_back(text.substr(pos, nl - pos));
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].find(R"("ts":)") < lines[1].find(R"("revision":)"));
  CHECK(lines[1].find(R"("revision":)") < lines[1].find(R"("event":)"));
  CHECK(lines[1].find(R"("event":)") < lines[1].find(R"("subtask":)"));
  CHECK(lines[1].find(R"("subtask":)") < lines[1].find(R"("agent":)"));
  CHECK(lines[1].find(R"("agent":)") < lines[1].find(R"("detail":)"));
  for (const auto& l : lines) CHECK(nlohmann::json::accept(l));

  auto parsed = RunLog::parse_jsonl(text);
  auto original = log.events();
  REQUIRE(parsed.size() == original.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].ts == original[i].ts);
    CHECK(parsed[i].revision == original[i].revision);
    CHECK(parsed[i].kind == original[i].kind);
    CHECK(parsed[i].subtask == original[i].subtask);
    CHECK(parsed[i].agent == original[i].agent);
    CHECK(parsed[i].detail == original[i].detail);
  }
  CHECK_THROWS_AS(RunLog::parse_jsonl("{\"event\": \"nope\"}\n"), ParseError);
}

TEST_CASE("timestamps are ISO-8601 UTC with milliseconds") {
  auto ts = iso8601_now();
  REQUIRE(ts.size() == 24);
  CHECK(ts[4] == '-');
  CHECK(ts[10] == 'T');
  CHECK(ts[19] == '.');
  CHECK(ts.back() == 'Z');
}

TEST_CASE("fault injector") {
  FaultInjector f;
  f.mask_ids = {"B"};
  CHECK(f.inject("B", "real") == "none");
  CHECK(f.inject("B", "real", 1) == "real");
  CHECK(f.inject("A", "real") == "real");

  f.mask_probability = 0.5;
  f.seed = 42;
  int masked = 0;
  for (int i = 0; i < 2000; ++i)
    if (f.should_mask("id" + std::to_string(i))) ++masked;
  CHECK(masked > 900);
  CHECK(masked < 1100);
  // Same seed, same decisions.
  FaultInjector g = f;
  for (int i = 0; i < 50; ++i)
    CHECK(f.should_mask("x" + std::to_string(i), 2) == g.should_mask("x" + std::to_string(i), 2));

  f.mask_probability = 1.5;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
}

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
  CHECK(unit_interval(0) == 0.0);
  CHECK(unit_interval(~0ULL) < 1.0);
}

TEST_CASE("engine options parse and validate") {
  EngineOptions o;
  o.set("max-concurrent", "3");
  o.set("strategy", "concurrent");
  o.set("mask", "B, C");
  o.set("k", "2");
  CHECK(o.get("max_concurrent") == std::optional<std::string>("3"));
  auto e = o.executor_config();
  CHECK(e.max_concurrent == 3);
  CHECK(e.strategy == UpdateStrategy::kConcurrentUpdate);
  CHECK(o.planner_config().k == 2);
  auto inj = o.injector();
  REQUIRE(inj.has_value());
  CHECK(inj->mask_ids == std::set<SubtaskId>{"B", "C"});

  CHECK_THROWS_AS(o.set("bogus", "1"), InvalidArgument);
  o.set("k", "two");
  CHECK_THROWS_AS(o.planner_config(), InvalidArgument);
  o.set("k", "0");
  CHECK_THROWS_AS(o.planner_config(), InvalidArgument);
  o.set("k", "3");
  o.set("strategy", "sideways");
  CHECK_THROWS_AS(o.executor_config(), InvalidArgument);
  o.set("strategy", "batch");
  o.set("no_update", "true");
  CHECK(o.executor_config().max_refinement_rounds == 0);
  o.set("verify", "maybe");
  CHECK_THROWS_AS(o.executor_config(), InvalidArgument);

  EngineOptions none;
  CHECK_FALSE(none.injector().has_value());
  CHECK(none.planner_kind() == "mock");
  CHECK(none.agents_kind() == "stub");
}

TEST_CASE("effective config echo carries resolved values") {
  EngineOptions o;
  o.set("max_refinement_rounds", "4");
  o.set("seed", "9");
  auto j = nlohmann::json::parse(o.effective_dump());
  CHECK(j["executor"]["max_refinement_rounds"] == 4);
  CHECK(j["executor"]["strategy"] == "batch_update");
  CHECK(j["seed"] == 9);
  CHECK(j["settings"]["seed"] == "9");
  CHECK_FALSE(j.contains("provider"));
}

TEST_CASE("provider config honours explicit values over the environment") {
  setenv("FLOW_MODEL", "env-model", 1);
  EngineOptions o;
  o.set("planner", "llm");
  CHECK(o.provider_config().model == "env-model");
  o.set("model", "flag-model");
  o.set("timeout_s", "7");
  o.set("retry_attempts", "5");
  auto c = o.provider_config();
  CHECK(c.model == "flag-model");
  CHECK(c.timeout == std::chrono::milliseconds(7000));
  CHECK(c.max_attempts == 5);
  unsetenv("FLOW_MODEL");
}

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("config file parsing") {
  auto p = write_temp("flow_cfg_ok.toml",
                      "# comment\n"
                      "[run]\n"
                      "max-concurrent = 4\n"
                      "model = \"gpt # not a comment\"\n"
                      "strategy = concurrent # trailing\n"
                      "\n");
  auto s = cli::load_config_file(p);
  CHECK(s.at("max_concurrent") == "4");
  CHECK(s.at("model") == "gpt # not a comment");
  CHECK(s.at("strategy") == "concurrent");
  CHECK(s.size() == 3);

  auto bad = write_temp("flow_cfg_bad.toml", "k = 1\njust words\n");
  try {
    cli::load_config_file(bad);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("flow_cfg_bad.toml:2") != std::string::npos);
  }
  CHECK_THROWS(cli::load_config_file("/nonexistent/flow.toml"));
}

TEST_CASE("settings precedence is file < env < flags") {
  cli::Settings file{{"model", "file"}, {"k", "2"}, {"seed", "1"}};
  cli::Settings env{{"model", "env"}, {"seed", "5"}};
  cli::Settings flags{{"seed", "9"}};
  auto m = cli::merge_settings(file, env, flags);
  CHECK(m.at("model") == "env");
  CHECK(m.at("k") == "2");
  CHECK(m.at("seed") == "9");

  setenv("FLOW_API_BASE", "http://example.invalid/v1", 1);
  setenv("FLOW_API_KEY", "", 1);
  auto e = cli::env_settings();
  CHECK(e.at("api_base") == "http://example.invalid/v1");
  CHECK(e.count("api_key") == 0);
  unsetenv("FLOW_API_BASE");
  unsetenv("FLOW_API_KEY");
}

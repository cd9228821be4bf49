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

#include "engine_options.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "fixtures.hpp"
#include "llm_planner.hpp"
#include "log.hpp"
#include "mock_planner.hpp"
#include "prompts.hpp"

namespace flow {

namespace {

const std::vector<std::string> kKnownKeys = {
    "planner",        "agents",          "k",           "temperature",
    "verify_temperature", "max_parse_retries", "context_budget", "strategy",
    "max_concurrent", "max_refinement_rounds", "verify", "no_update",
    "mask",           "mask_probability", "sentinel",   "seed",
    "fixtures",       "prompt_dir",      "stub_latency_ms", "api_base",
    "api_key",        "model",           "timeout_s",   "retry_attempts",
    "max_in_flight",  "out",             "n",           "p_f",
    "pairs",          "trials",          "edge_prob",   "seeds",
};

bool is_secret(const std::string& key) { return key == "api_key"; }

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string EngineOptions::normalize_key(const std::string& key) {
  auto out = trim(key);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

const std::vector<std::string>& EngineOptions::known_keys() { return kKnownKeys; }

void EngineOptions::set(const std::string& key, const std::string& value) {
  auto k = normalize_key(key);
  if (std::find(kKnownKeys.begin(), kKnownKeys.end(), k) == kKnownKeys.end())
    throw InvalidArgument("unknown option '" + key + "'");
  if (is_secret(k) && !value.empty()) log::register_secret(value);
  values_[k] = value;
}

std::optional<std::string> EngineOptions::get(const std::string& key) const {
  auto it = values_.find(normalize_key(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string EngineOptions::dump() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = is_secret(k) && !v.empty() ? "***" : v;
  return j.dump();
}

std::string EngineOptions::effective_dump() const {
  const auto p = planner_config();
  const auto e = executor_config();
  nlohmann::json j = {
      {"settings", nlohmann::json::parse(dump())},
      {"planner",
       {{"kind", planner_kind()},
        {"k", p.k},
        {"temperature", p.temperature},
        {"verify_temperature", p.verify_temperature},
        {"max_parse_retries", p.max_parse_retries},
        {"context_budget", p.context_budget}}},
      {"executor",
       {{"agents", agents_kind()},
        {"strategy", strategy_token(e.strategy)},
        {"max_concurrent", e.max_concurrent},
        {"max_refinement_rounds", e.max_refinement_rounds},
        {"verify", e.verify_completions}}},
      {"seed", seed()},
  };
  if (planner_kind() == "llm" || agents_kind() == "llm") {
    const auto c = provider_config();
    j["provider"] = {{"base_url", c.base_url},
                     {"model", c.model},
                     {"api_key", c.api_key.empty() ? "" : "***"},
                     {"timeout_ms", c.timeout.count()},
                     {"max_attempts", c.max_attempts}};
  }
  return j.dump();
}

long long EngineOptions::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto s = trim(*v);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InvalidArgument("option '" + key + "' expects an integer, got '" + *v + "'");
  return out;
}

double EngineOptions::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto s = trim(*v);
  try {
    std::size_t used = 0;
    double out = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("option '" + key + "' expects a number, got '" + *v + "'");
  }
}

bool EngineOptions::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto s = trim(*v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw InvalidArgument("option '" + key + "' expects a boolean, got '" + *v + "'");
}

std::string EngineOptions::get_string(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

std::string EngineOptions::planner_kind() const {
  auto k = get_string("planner", "mock");
  if (k != "mock" && k != "llm")
    throw InvalidArgument("planner must be 'mock' or 'llm', got '" + k + "'");
  return k;
}

std::string EngineOptions::agents_kind() const {
  auto k = get_string("agents", "stub");
  if (k != "stub" && k != "llm")
    throw InvalidArgument("agents must be 'stub' or 'llm', got '" + k + "'");
  return k;
}

std::uint64_t EngineOptions::seed() const {
  auto s = get_int("seed", 0);
  if (s < 0) throw InvalidArgument("seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

PlannerConfig EngineOptions::planner_config() const {
  PlannerConfig c;
  c.k = static_cast<int>(get_int("k", c.k));
  c.temperature = get_double("temperature", c.temperature);
  c.verify_temperature = get_double("verify_temperature", c.verify_temperature);
  c.max_parse_retries = static_cast<int>(get_int("max_parse_retries", c.max_parse_retries));
  auto budget = get_int("context_budget", static_cast<long long>(c.context_budget));
  if (budget < 0) throw InvalidArgument("context_budget must be >= 0");
  c.context_budget = static_cast<std::size_t>(budget);
  c.validate();
  return c;
}

ExecutorConfig EngineOptions::executor_config() const {
  ExecutorConfig c;
  if (auto s = get("strategy")) {
    auto parsed = parse_strategy(*s);
    if (!parsed) throw InvalidArgument("unknown update strategy '" + *s + "'");
    c.strategy = *parsed;
  }
  auto mc = get_int("max_concurrent", static_cast<long long>(c.max_concurrent));
  if (mc < 1) throw InvalidArgument("max_concurrent must be >= 1");
  c.max_concurrent = static_cast<std::size_t>(mc);
  c.max_refinement_rounds =
      static_cast<int>(get_int("max_refinement_rounds", c.max_refinement_rounds));
  if (get_bool("no_update", false)) c.max_refinement_rounds = 0;
  c.verify_completions = get_bool("verify", c.verify_completions);
  c.validate();
  return c;
}

std::optional<FaultInjector> EngineOptions::injector() const {
  FaultInjector f;
  if (auto m = get("mask")) {
    std::stringstream ss(*m);
    std::string item;
    while (std::getline(ss, item, ','))
      if (auto id = trim(item); !id.empty()) f.mask_ids.insert(id);
  }
  f.mask_probability = get_double("mask_probability", 0.0);
  f.sentinel = get_string("sentinel", f.sentinel);
  f.seed = seed();
  if (f.mask_ids.empty() && f.mask_probability == 0.0) return std::nullopt;
  f.validate();
  return f;
}

llm::ProviderConfig EngineOptions::provider_config() const {
  auto c = llm::ProviderConfig::from_env();
  c.base_url = get_string("api_base", c.base_url);
  c.api_key = get_string("api_key", c.api_key);
  c.model = get_string("model", c.model);
  c.timeout = std::chrono::milliseconds(
      static_cast<long long>(get_double("timeout_s", c.timeout.count() / 1000.0) * 1000.0));
  c.max_attempts = static_cast<int>(get_int("retry_attempts", c.max_attempts));
  c.jitter_seed ^= seed();
  return c;
}

Engine build_engine(const EngineOptions& options) {
  Engine e;
  const auto planner_kind = options.planner_kind();
  const auto agents_kind = options.agents_kind();
  auto templates = prompts::Templates::defaults();
  if (auto dir = options.get("prompt_dir")) templates = prompts::Templates::load_dir(*dir);

  if (planner_kind == "llm" || agents_kind == "llm") {
    auto provider = options.provider_config();
    provider.validate();
    auto in_flight = options.get_int("max_in_flight", 8);
    if (in_flight < 1) throw InvalidArgument("max_in_flight must be >= 1");
    e.client = std::make_shared<llm::Client>(provider, static_cast<std::size_t>(in_flight));
    e.usage_probe = [client = e.client] { return client->usage(); };
  }

  if (planner_kind == "llm") {
    e.planner = std::make_unique<LlmPlanner>(e.client, templates);
  } else if (auto path = options.get("fixtures")) {
    e.planner = std::make_unique<MockPlanner>(fixtures::load_candidate_file(*path));
  } else {
    e.planner = std::make_unique<MockPlanner>(MockPlanner::with_default_fixtures());
  }

  if (agents_kind == "llm") {
    e.agents = std::make_unique<LlmAgentBackend>(e.client, std::map<std::string, std::string>{},
                                                 templates,
                                                 options.get_double("temperature", 0.7));
  } else {
    auto latency = options.get_int("stub_latency_ms", 0);
    if (latency < 0) throw InvalidArgument("stub_latency_ms must be >= 0");
    e.agents = std::make_unique<StubBackend>(std::chrono::milliseconds(latency));
  }
  return e;
}

RunOptions run_options(const EngineOptions& options) {
  RunOptions r;
  r.injector = options.injector();
  r.config_echo = options.effective_dump();
  return r;
}

}  // namespace flow

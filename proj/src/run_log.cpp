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

#include "run_log.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace flow {
namespace {

constexpr std::array<const char*, 14> kTokens = {
    "planned",     "selected",      "dispatched",     "completed",
    "verified",    "verify_failed", "failed",         "masked",
    "update_proposed", "update_merged", "no_change",  "stale_result",
    "budget_exhausted", "done"};

}  // namespace

const char* event_token(EventKind kind) {
  return kTokens[static_cast<std::size_t>(kind)];
}

std::optional<EventKind> parse_event_token(const std::string& token) {
  for (std::size_t i = 0; i < kTokens.size(); ++i)
    if (token == kTokens[i]) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string iso8601_now() {
  using namespace std::chrono;
  auto now = system_clock::now();
  auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

RunLog::RunLog(const RunLog& other) : events_(other.events()) {}

RunLog& RunLog::operator=(const RunLog& other) {
  if (this != &other) {
    auto copy = other.events();
    std::lock_guard lock(mu_);
    events_ = std::move(copy);
  }
  return *this;
}

void RunLog::append(EventKind kind, std::int64_t revision,
                    std::optional<std::string> subtask,
                    std::optional<std::string> agent, std::string detail) {
  Event e{iso8601_now(), revision, kind, std::move(subtask), std::move(agent),
          std::move(detail)};
  std::lock_guard lock(mu_);
  events_.push_back(std::move(e));
}

std::vector<Event> RunLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t RunLog::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

std::string RunLog::to_jsonl() const {
  std::ostringstream out;
  for (const auto& e : events()) {
    nlohmann::ordered_json j;
    j["ts"] = e.ts;
    j["revision"] = e.revision;
    j["event"] = event_token(e.kind);
    j["subtask"] = e.subtask ? nlohmann::ordered_json(*e.subtask) : nullptr;
    j["agent"] = e.agent ? nlohmann::ordered_json(*e.agent) : nullptr;
    j["detail"] = e.detail;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<Event> RunLog::parse_jsonl(const std::string& text) {
  std::vector<Event> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Event e;
      e.ts = j.at("ts").get<std::string>();
      e.revision = j.at("revision").get<std::int64_t>();
      auto kind = parse_event_token(j.at("event").get<std::string>());
      if (!kind) throw ParseError("unknown event token");
      e.kind = *kind;
      if (!j.at("subtask").is_null()) e.subtask = j["subtask"].get<std::string>();
      if (!j.at("agent").is_null()) e.agent = j["agent"].get<std::string>();
      e.detail = j.at("detail").get<std::string>();
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw ParseError("run log line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace flow

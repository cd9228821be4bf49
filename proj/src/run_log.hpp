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

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace flow {

enum class EventKind {
  kPlanned,
  kSelected,
  kDispatched,
  kCompleted,
  kVerified,
  kVerifyFailed,
  kFailed,
  kMasked,
  kUpdateProposed,
  kUpdateMerged,
  kNoChange,
  kStaleResult,
  kBudgetExhausted,
  kDone,
};

const char* event_token(EventKind kind);
std::optional<EventKind> parse_event_token(const std::string& token);

struct Event {
  std::string ts;  // ISO-8601 UTC, millisecond precision
  std::int64_t revision = 0;
  EventKind kind = EventKind::kPlanned;
  std::optional<std::string> subtask;
  std::optional<std::string> agent;  // "role#clone"
  std::string detail;
};

// Append-only run log. Appends are serialized; the coordinator is the only
// writer during a run but planner helpers may append from other threads.
class RunLog {
 public:
  RunLog() = default;
  RunLog(const RunLog& other);
  RunLog& operator=(const RunLog& other);

  void append(EventKind kind, std::int64_t revision,
              std::optional<std::string> subtask = std::nullopt,
              std::optional<std::string> agent = std::nullopt,
              std::string detail = {});

  std::vector<Event> events() const;
  std::size_t size() const;

  // One JSON object per line, keys in the order ts, revision, event,
  // subtask, agent, detail.
  std::string to_jsonl() const;
  static std::vector<Event> parse_jsonl(const std::string& text);

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
};

std::string iso8601_now();

}  // namespace flow

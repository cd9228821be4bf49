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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aov_graph.hpp"

namespace flow {

class RunLog;

enum class SubtaskStatus { kNotStarted, kInProgress, kCompleted, kFailed };

const char* status_token(SubtaskStatus status);
// Canonical tokens plus the spaced spellings planners tend to emit.
std::optional<SubtaskStatus> parse_status(std::string_view token);
bool is_legal_transition(SubtaskStatus from, SubtaskStatus to);

struct SubtaskRecord {
  std::string requirement;
  SubtaskStatus status = SubtaskStatus::kNotStarted;
  std::optional<std::string> data;  // set iff completed
  std::size_t num_parents_not_completed = 0;
  std::vector<SubtaskId> children;
  std::string agent;

  bool operator==(const SubtaskRecord&) const = default;
};

// A record as it appears in a document, before any structural checks.
// Fields absent from the document stay empty.
struct RawTask {
  std::optional<std::string> requirement;
  std::optional<SubtaskStatus> status;
  std::optional<std::string> data;
  std::optional<std::int64_t> num_parents_not_completed;
  std::vector<SubtaskId> children;
  std::optional<std::string> agent;
};

// Reads an id -> record object, applying the key shim ("subtask requirement"
// for "requirement", "next" for "child"; "prev" is ignored). Throws
// ParseError naming the offending key.
std::map<SubtaskId, RawTask> parse_task_map(const nlohmann::json& tasks);

// Proposed structure for a merge; no data payloads.
struct ProposedRecord {
  std::string requirement;
  std::vector<SubtaskId> children;
  std::string agent;
  std::optional<SubtaskStatus> status;
};

struct StructuralUpdate {
  std::map<SubtaskId, ProposedRecord> tasks;

  bool empty() const { return tasks.empty(); }
  // Structural checks only: children resolve, no cycle, fields nonempty.
  // Returns a diagnosis, empty when fine.
  std::string check() const;
  AovGraph to_graph() const;
};

struct MergeOutcome {
  bool accepted = true;
  bool changed = false;
  std::string diagnosis;
  std::vector<SubtaskId> added;
  std::vector<SubtaskId> removed;
  // Requirement changed (output discarded), or running but given a new
  // unfinished parent; either way back to not_started.
  std::vector<SubtaskId> reset;
};

// The keyed runtime record of a workflow. Mutated only by the coordinator;
// every mutator checks its preconditions before touching anything, so a
// throwing call leaves the state unchanged.
class WorkflowState {
 public:
  WorkflowState() = default;

  static WorkflowState from_graph(const AovGraph& graph, std::string goal = {});

  const std::map<SubtaskId, SubtaskRecord>& records() const { return records_; }
  const SubtaskRecord& at(const SubtaskId& id) const;
  bool contains(const SubtaskId& id) const { return records_.count(id) > 0; }
  std::size_t size() const { return records_.size(); }
  const std::string& goal() const { return goal_; }
  void set_goal(std::string goal) { goal_ = std::move(goal); }
  std::int64_t revision() const { return revision_; }

  std::vector<SubtaskId> ready_set() const;
  std::vector<SubtaskId> parents_of(const SubtaskId& id) const;
  std::vector<SubtaskId> descendants_of(const SubtaskId& id) const;
  bool all_completed() const;
  std::size_t count(SubtaskStatus status) const;
  // Failed subtasks that still hold back at least one unfinished descendant.
  std::vector<SubtaskId> failed_blocking() const;

  void mark_in_progress(const SubtaskId& id);
  void mark_completed(const SubtaskId& id, std::string output);
  void mark_failed(const SubtaskId& id, std::string reason);
  // failed -> not_started
  void requeue(const SubtaskId& id);

  // Empty update: no-op. Otherwise merges the proposal (see MergeOutcome);
  // a structurally invalid proposal is rejected and the state kept as is.
  // Removed completed subtasks have their data archived to `log` if given.
  MergeOutcome merge_update(const StructuralUpdate& update, RunLog* log = nullptr);

  // The implied graph; agent personas are empty.
  AovGraph to_graph() const;

  std::map<SubtaskId, std::size_t> recomputed_counters() const;
  bool counters_consistent() const;

  // Completed ids, oldest completion first. Not serialized; a loaded state
  // lists its completed records in id order.
  const std::vector<SubtaskId>& completion_order() const { return completion_order_; }
  // Last failure reason for a subtask, if any. Not serialized.
  std::optional<std::string> failure_reason(const SubtaskId& id) const;

  nlohmann::json to_json_value() const;
  std::string to_json() const;

  struct Loaded;
  static Loaded from_json(std::string_view text);
  static Loaded from_json_value(const nlohmann::json& doc);

  // Field-for-field over goal, revision and records.
  bool operator==(const WorkflowState& other) const;

 private:
  SubtaskRecord& mutable_at(const SubtaskId& id);
  void require_status(const SubtaskId& id, SubtaskStatus expected,
                      SubtaskStatus target) const;

  std::map<SubtaskId, SubtaskRecord> records_;
  std::string goal_;
  std::int64_t revision_ = 0;
  std::vector<SubtaskId> completion_order_;
  std::map<SubtaskId, std::string> failure_reasons_;
};

struct WorkflowState::Loaded {
  WorkflowState state;
  std::vector<std::string> warnings;
};

}  // namespace flow

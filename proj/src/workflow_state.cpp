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

#include "workflow_state.hpp"

#include <algorithm>
#include <set>

#include "errors.hpp"
#include "run_log.hpp"

namespace flow {

using nlohmann::json;

const char* status_token(SubtaskStatus status) {
  switch (status) {
    case SubtaskStatus::kNotStarted: return "not_started";
    case SubtaskStatus::kInProgress: return "in_progress";
    case SubtaskStatus::kCompleted: return "completed";
    case SubtaskStatus::kFailed: return "failed";
  }
  return "?";
}

std::optional<SubtaskStatus> parse_status(std::string_view token) {
  if (token == "not_started" || token == "not started" || token == "pending")
    return SubtaskStatus::kNotStarted;
  if (token == "in_progress" || token == "in progress" || token == "in-progress")
    return SubtaskStatus::kInProgress;
  if (token == "completed") return SubtaskStatus::kCompleted;
  if (token == "failed") return SubtaskStatus::kFailed;
  return std::nullopt;
}

bool is_legal_transition(SubtaskStatus from, SubtaskStatus to) {
  using S = SubtaskStatus;
  return (from == S::kNotStarted && to == S::kInProgress) ||
         (from == S::kInProgress && (to == S::kCompleted || to == S::kFailed)) ||
         (from == S::kFailed && to == S::kNotStarted);
}

std::map<SubtaskId, RawTask> parse_task_map(const json& tasks) {
  if (!tasks.is_object()) throw ParseError("tasks: expected an object keyed by subtask id");
  std::map<SubtaskId, RawTask> out;
  for (const auto& [id, value] : tasks.items()) {
    const std::string where = "tasks." + id;
    if (id.empty()) throw ParseError("tasks: empty subtask id");
    if (!value.is_object()) throw ParseError(where + ": expected an object");
    RawTask raw;
    auto text_field = [&](const char* key) -> std::optional<std::string> {
      auto it = value.find(key);
      if (it == value.end() || it->is_null()) return std::nullopt;
      if (!it->is_string())
        throw ParseError(where + "." + key + ": expected a string");
      return it->get<std::string>();
    };
    raw.requirement = text_field("requirement");
    if (!raw.requirement) raw.requirement = text_field("subtask requirement");
    raw.agent = text_field("agent");
    if (auto status = text_field("status")) {
      raw.status = parse_status(*status);
      if (!raw.status)
        throw ParseError(where + ".status: unknown status token '" + *status + "'");
    }
    if (auto it = value.find("data"); it != value.end() && !it->is_null())
      raw.data = it->is_string() ? it->get<std::string>() : it->dump();
    if (auto it = value.find("num_parents_not_completed");
        it != value.end() && !it->is_null()) {
      if (!it->is_number_integer())
        throw ParseError(where + ".num_parents_not_completed: expected an integer");
      raw.num_parents_not_completed = it->get<std::int64_t>();
    }
    const char* child_key = value.contains("child") ? "child" : "next";
    if (auto it = value.find(child_key); it != value.end() && !it->is_null()) {
      if (!it->is_array())
        throw ParseError(where + "." + child_key + ": expected a list of ids");
      for (const auto& c : *it) {
        if (!c.is_string())
          throw ParseError(where + "." + child_key + ": expected a list of ids");
        auto cid = c.get<std::string>();
        if (std::find(raw.children.begin(), raw.children.end(), cid) ==
            raw.children.end())
          raw.children.push_back(std::move(cid));
      }
    }
    out.emplace(id, std::move(raw));
  }
  return out;
}

AovGraph StructuralUpdate::to_graph() const {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  for (const auto& [id, rec] : tasks) {
    vertices.push_back({id, rec.requirement, {rec.agent, {}}});
    for (const auto& c : rec.children) edges.push_back({id, c});
  }
  return AovGraph(std::move(vertices), std::move(edges));
}

std::string StructuralUpdate::check() const {
  auto report = validate(to_graph());
  return report.ok() ? std::string{} : report.summary();
}

WorkflowState WorkflowState::from_graph(const AovGraph& graph, std::string goal) {
  require_valid(graph);
  WorkflowState state;
  state.goal_ = std::move(goal);
  for (const auto& v : graph.vertices()) {
    SubtaskRecord rec;
    rec.requirement = v.requirement;
    rec.agent = v.agent.name;
    rec.children = graph.children(v.id);
    rec.num_parents_not_completed = graph.parents(v.id).size();
    state.records_.emplace(v.id, std::move(rec));
  }
  return state;
}

const SubtaskRecord& WorkflowState::at(const SubtaskId& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) throw MissingKeyError("unknown subtask '" + id + "'");
  return it->second;
}

SubtaskRecord& WorkflowState::mutable_at(const SubtaskId& id) {
  auto it = records_.find(id);
  if (it == records_.end()) throw MissingKeyError("unknown subtask '" + id + "'");
  return it->second;
}

std::vector<SubtaskId> WorkflowState::ready_set() const {
  std::vector<SubtaskId> out;
  for (const auto& [id, rec] : records_)
    if (rec.status == SubtaskStatus::kNotStarted && rec.num_parents_not_completed == 0)
      out.push_back(id);
  return out;
}

std::vector<SubtaskId> WorkflowState::parents_of(const SubtaskId& id) const {
  std::vector<SubtaskId> out;
  for (const auto& [pid, rec] : records_)
    if (std::find(rec.children.begin(), rec.children.end(), id) != rec.children.end())
      out.push_back(pid);
  return out;
}

std::vector<SubtaskId> WorkflowState::descendants_of(const SubtaskId& id) const {
  std::set<SubtaskId> seen;
  std::vector<SubtaskId> stack = at(id).children;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    for (const auto& c : at(u).children) stack.push_back(c);
  }
  return {seen.begin(), seen.end()};
}

bool WorkflowState::all_completed() const {
  return count(SubtaskStatus::kCompleted) == records_.size();
}

std::size_t WorkflowState::count(SubtaskStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(),
      [&](const auto& kv) { return kv.second.status == status; }));
}

std::vector<SubtaskId> WorkflowState::failed_blocking() const {
  std::vector<SubtaskId> out;
  for (const auto& [id, rec] : records_) {
    if (rec.status != SubtaskStatus::kFailed) continue;
    for (const auto& d : descendants_of(id)) {
      if (at(d).status != SubtaskStatus::kCompleted) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

void WorkflowState::require_status(const SubtaskId& id, SubtaskStatus expected,
                                   SubtaskStatus target) const {
  const auto& rec = at(id);
  if (rec.status != expected || !is_legal_transition(rec.status, target))
    throw StateTransitionError("subtask '" + id + "': illegal transition " +
                               status_token(rec.status) + " -> " +
                               status_token(target));
}

void WorkflowState::mark_in_progress(const SubtaskId& id) {
  require_status(id, SubtaskStatus::kNotStarted, SubtaskStatus::kInProgress);
  if (auto n = at(id).num_parents_not_completed; n > 0)
    throw StateTransitionError("subtask '" + id + "' still has " + std::to_string(n) +
                               " unfinished parent(s)");
  mutable_at(id).status = SubtaskStatus::kInProgress;
}

void WorkflowState::mark_completed(const SubtaskId& id, std::string output) {
  require_status(id, SubtaskStatus::kInProgress, SubtaskStatus::kCompleted);
  auto& rec = mutable_at(id);
  rec.status = SubtaskStatus::kCompleted;
  rec.data = std::move(output);
  for (const auto& c : rec.children) {
    auto& child = mutable_at(c);
    if (child.num_parents_not_completed > 0) --child.num_parents_not_completed;
  }
  completion_order_.push_back(id);
  failure_reasons_.erase(id);
}

void WorkflowState::mark_failed(const SubtaskId& id, std::string reason) {
  require_status(id, SubtaskStatus::kInProgress, SubtaskStatus::kFailed);
  mutable_at(id).status = SubtaskStatus::kFailed;
  failure_reasons_[id] = std::move(reason);
}

void WorkflowState::requeue(const SubtaskId& id) {
  require_status(id, SubtaskStatus::kFailed, SubtaskStatus::kNotStarted);
  mutable_at(id).status = SubtaskStatus::kNotStarted;
}

std::optional<std::string> WorkflowState::failure_reason(const SubtaskId& id) const {
  auto it = failure_reasons_.find(id);
  if (it == failure_reasons_.end()) return std::nullopt;
  return it->second;
}

std::map<SubtaskId, std::size_t> WorkflowState::recomputed_counters() const {
  std::map<SubtaskId, std::size_t> out;
  for (const auto& [id, _] : records_) out[id] = 0;
  for (const auto& [id, rec] : records_) {
    if (rec.status == SubtaskStatus::kCompleted) continue;
    for (const auto& c : rec.children)
      if (auto it = out.find(c); it != out.end()) ++it->second;
  }
  return out;
}

bool WorkflowState::counters_consistent() const {
  auto counters = recomputed_counters();
  for (const auto& [id, rec] : records_)
    if (counters[id] != rec.num_parents_not_completed) return false;
  return true;
}

AovGraph WorkflowState::to_graph() const {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  for (const auto& [id, rec] : records_) {
    vertices.push_back({id, rec.requirement, {rec.agent, {}}});
    for (const auto& c : rec.children) edges.push_back({id, c});
  }
  return AovGraph(std::move(vertices), std::move(edges));
}

MergeOutcome WorkflowState::merge_update(const StructuralUpdate& update, RunLog* log) {
  MergeOutcome outcome;
  if (update.empty()) return outcome;

  if (auto diagnosis = update.check(); !diagnosis.empty()) {
    outcome.accepted = false;
    outcome.diagnosis = "merge rejected: " + diagnosis;
    if (log) log->append(EventKind::kNoChange, revision_, std::nullopt, std::nullopt,
                         outcome.diagnosis);
    return outcome;
  }

  std::map<SubtaskId, SubtaskRecord> merged;
  for (const auto& [id, proposed] : update.tasks) {
    SubtaskRecord rec;
    rec.requirement = proposed.requirement;
    rec.children = proposed.children;
    rec.agent = proposed.agent;
    auto it = records_.find(id);
    if (it == records_.end()) {
      outcome.added.push_back(id);
    } else if (it->second.requirement != proposed.requirement) {
      outcome.reset.push_back(id);
    } else {
      const auto& cur = it->second;
      switch (cur.status) {
        case SubtaskStatus::kCompleted:
          rec.status = SubtaskStatus::kCompleted;
          rec.data = cur.data;
          break;
        case SubtaskStatus::kInProgress:
          rec.status = SubtaskStatus::kInProgress;
          break;
        case SubtaskStatus::kFailed:
          rec.status = proposed.status == SubtaskStatus::kFailed
                           ? SubtaskStatus::kFailed
                           : SubtaskStatus::kNotStarted;
          break;
        case SubtaskStatus::kNotStarted:
          break;
      }
    }
    merged.emplace(id, std::move(rec));
  }
  for (const auto& [id, cur] : records_) {
    if (update.tasks.count(id)) continue;
    outcome.removed.push_back(id);
    if (log && cur.status == SubtaskStatus::kCompleted)
      log->append(EventKind::kUpdateMerged, revision_, id, std::nullopt,
                  "removed completed subtask; archived data: " + cur.data.value_or(""));
  }

  records_ = std::move(merged);
  for (auto& [id, n] : recomputed_counters()) {
    auto& rec = records_[id];
    rec.num_parents_not_completed = n;
    // A running subtask that gained an unfinished parent has to start over.
    if (rec.status == SubtaskStatus::kInProgress && n > 0) {
      rec.status = SubtaskStatus::kNotStarted;
      outcome.reset.push_back(id);
    }
  }
  std::sort(outcome.reset.begin(), outcome.reset.end());
  std::erase_if(completion_order_, [&](const SubtaskId& id) {
    auto it = records_.find(id);
    return it == records_.end() || it->second.status != SubtaskStatus::kCompleted;
  });
  std::erase_if(failure_reasons_, [&](const auto& kv) {
    auto it = records_.find(kv.first);
    return it == records_.end() || it->second.status != SubtaskStatus::kFailed;
  });
  ++revision_;
  outcome.changed = true;
  return outcome;
}

json WorkflowState::to_json_value() const {
  json tasks = json::object();
  for (const auto& [id, rec] : records_) {
    tasks[id] = {
        {"requirement", rec.requirement},
        {"status", status_token(rec.status)},
        {"data", rec.data ? json(*rec.data) : json(nullptr)},
        {"num_parents_not_completed", rec.num_parents_not_completed},
        {"child", rec.children},
        {"agent", rec.agent},
    };
  }
  return {{"goal", goal_}, {"revision", revision_}, {"tasks", std::move(tasks)}};
}

std::string WorkflowState::to_json() const { return to_json_value().dump(2) + "\n"; }

WorkflowState::Loaded WorkflowState::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed workflow document: ") + e.what());
  }
  return from_json_value(doc);
}

WorkflowState::Loaded WorkflowState::from_json_value(const json& doc) {
  if (!doc.is_object()) throw ParseError("workflow document: expected an object");
  if (!doc.contains("tasks")) throw ParseError("workflow document: missing key 'tasks'");
  Loaded loaded;
  auto& state = loaded.state;
  if (auto it = doc.find("goal"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("goal: expected a string");
    state.goal_ = it->get<std::string>();
  }
  if (auto it = doc.find("revision"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
      throw ParseError("revision: expected a nonnegative integer");
    state.revision_ = it->get<std::int64_t>();
  }

  auto raw = parse_task_map(doc.at("tasks"));
  for (auto& [id, task] : raw) {
    const std::string where = "tasks." + id;
    if (!task.requirement || task.requirement->empty())
      throw ParseError(where + ".requirement: missing or empty");
    if (!task.agent || task.agent->empty())
      throw ParseError(where + ".agent: missing or empty");
    for (const auto& c : task.children)
      if (!raw.count(c))
        throw ParseError(where + ".child: unknown subtask '" + c + "'");
    SubtaskRecord rec;
    rec.requirement = *task.requirement;
    rec.status = task.status.value_or(SubtaskStatus::kNotStarted);
    rec.children = task.children;
    rec.agent = *task.agent;
    if (rec.status == SubtaskStatus::kCompleted) {
      if (!task.data) throw ParseError(where + ".data: completed subtask without data");
      rec.data = task.data;
    } else if (task.data) {
      throw ParseError(where + ".data: only completed subtasks carry data");
    }
    state.records_.emplace(id, std::move(rec));
  }

  auto report = validate(state.to_graph());
  for (auto kind : {ViolationKind::kSelfLoop, ViolationKind::kCycle})
    if (report.has(kind)) throw ParseError("tasks: " + report.first(kind)->message);

  auto counters = state.recomputed_counters();
  for (auto& [id, rec] : state.records_) {
    const auto& task = raw.at(id);
    rec.num_parents_not_completed = counters[id];
    if (task.num_parents_not_completed &&
        *task.num_parents_not_completed != static_cast<std::int64_t>(counters[id]))
      loaded.warnings.push_back(
          "tasks." + id + ".num_parents_not_completed: document says " +
          std::to_string(*task.num_parents_not_completed) + ", recomputed " +
          std::to_string(counters[id]));
    if (rec.status == SubtaskStatus::kCompleted) state.completion_order_.push_back(id);
  }
  return loaded;
}

bool WorkflowState::operator==(const WorkflowState& other) const {
  return goal_ == other.goal_ && revision_ == other.revision_ &&
         records_ == other.records_;
}

}  // namespace flow

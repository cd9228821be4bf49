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

#include "errors.hpp"
#include "fixtures.hpp"
#include "run_log.hpp"
#include "test_support.hpp"
#include "workflow_state.hpp"

using namespace flow;
using nlohmann::json;


TEST_CASE("status tokens and aliases") {
  CHECK(parse_status("not_started") == SubtaskStatus::kNotStarted);
  CHECK(parse_status("pending") == SubtaskStatus::kNotStarted);
  CHECK(parse_status("not started") == SubtaskStatus::kNotStarted);
  CHECK(parse_status("in progress") == SubtaskStatus::kInProgress);
  CHECK(parse_status("in-progress") == SubtaskStatus::kInProgress);
  CHECK(parse_status("completed") == SubtaskStatus::kCompleted);
  CHECK(parse_status("failed") == SubtaskStatus::kFailed);
  CHECK_FALSE(parse_status("done?").has_value());
  CHECK(std::string(status_token(SubtaskStatus::kInProgress)) == "in_progress");
}

TEST_CASE("transition table") {
  using S = SubtaskStatus;
  CHECK(is_legal_transition(S::kNotStarted, S::kInProgress));
  CHECK(is_legal_transition(S::kInProgress, S::kCompleted));
  CHECK(is_legal_transition(S::kInProgress, S::kFailed));
  CHECK(is_legal_transition(S::kFailed, S::kNotStarted));
  CHECK_FALSE(is_legal_transition(S::kNotStarted, S::kCompleted));
  CHECK_FALSE(is_legal_transition(S::kCompleted, S::kInProgress));
}

TEST_CASE("from_graph builds counters and children") {
  auto s = WorkflowState::from_graph(fixtures::workflow1(), "g");
  CHECK(s.at("D").num_parents_not_completed == 3);
  CHECK(s.at("C").num_parents_not_completed == 2);
  CHECK(s.at("A").children == std::vector<SubtaskId>{"C", "D"});
  CHECK(s.ready_set() == std::vector<SubtaskId>{"A", "B"});
  CHECK(s.counters_consistent());
}

TEST_CASE("completion decrements children and opens the frontier") {
  auto s = WorkflowState::from_graph(fixtures::workflow2(), "g");
  s.mark_in_progress("A");
  s.mark_completed("A", "a");
  CHECK(s.at("C").num_parents_not_completed == 1);
  CHECK(s.ready_set() == std::vector<SubtaskId>{"B"});
  s.mark_in_progress("B");
  s.mark_completed("B", "b");
  CHECK(s.ready_set() == std::vector<SubtaskId>{"C"});
  CHECK(s.completion_order() == std::vector<SubtaskId>{"A", "B"});
  CHECK(s.counters_consistent());
}

TEST_CASE("illegal transitions throw and leave the state alone") {
  auto s = WorkflowState::from_graph(fixtures::workflow2(), "g");
  auto before = s;
  CHECK_THROWS_AS(s.mark_completed("A", "x"), StateTransitionError);
  CHECK_THROWS_AS(s.mark_in_progress("C"), StateTransitionError);  // parents pending
  CHECK_THROWS_AS(s.requeue("A"), StateTransitionError);
  CHECK_THROWS_AS(s.mark_in_progress("nope"), MissingKeyError);
  CHECK(s == before);
  s.mark_in_progress("A");
  s.mark_failed("A", "bad");
  CHECK(s.failure_reason("A") == std::string("bad"));
  CHECK(s.failed_blocking() == std::vector<SubtaskId>{"A"});
  s.requeue("A");
  CHECK(s.at("A").status == SubtaskStatus::kNotStarted);
}

TEST_CASE("snapshot round trip on random consistent states") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = flow::testing::random_progress(seed);
    auto text = s.to_json();
    auto loaded = WorkflowState::from_json(text);
    CHECK(loaded.warnings.empty());
    CHECK(loaded.state == s);
    CHECK(loaded.state.to_json() == text);
  }
}

TEST_CASE("spaced-key and next aliases load") {
  const char* doc = R"({
    "tasks": {
      "task0": {"id": "task0", "subtask requirement": "Write the outline", "status": "pending",
                "data": null, "next": ["task1"], "prev": [], "agent": "Writer"},
      "task1": {"subtask requirement": "Write the body", "status": "in progress",
                "next": [], "prev": ["task0"], "agent": "Writer"}
    }
  })";
  auto loaded = WorkflowState::from_json(doc);
  const auto& s = loaded.state;
  CHECK(s.at("task0").requirement == "Write the outline");
  CHECK(s.at("task0").children == std::vector<SubtaskId>{"task1"});
  CHECK(s.at("task1").status == SubtaskStatus::kInProgress);
  CHECK(s.at("task1").num_parents_not_completed == 1);
  CHECK(s.revision() == 0);
}

TEST_CASE("counter mismatch is repaired with a warning") {
  auto j = json::parse(WorkflowState::from_graph(fixtures::workflow2(), "g").to_json());
  j["tasks"]["C"]["num_parents_not_completed"] = 5;
  auto loaded = WorkflowState::from_json(j.dump());
  CHECK(loaded.state.at("C").num_parents_not_completed == 2);
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0] == "tasks.C.num_parents_not_completed: document says 5, recomputed 2");
}

TEST_CASE("malformed snapshots name the offending key") {
  auto base = json::parse(WorkflowState::from_graph(fixtures::workflow2(), "g").to_json());
  auto expect = [](const json& doc, const std::string& needle) {
    try {
      WorkflowState::from_json(doc.dump());
      FAIL("expected a ParseError mentioning " << needle);
    } catch (const ParseError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  auto j = base;
  j["tasks"]["A"]["status"] = "finished";
  expect(j, "tasks.A.status");
  j = base;
  j["tasks"]["A"]["child"] = {"Z"};
  expect(j, "tasks.A.child: unknown subtask 'Z'");
  j = base;
  j["tasks"]["D"]["child"] = {"A"};
  expect(j, "cycle");
  j = base;
  j["tasks"]["B"].erase("agent");
  expect(j, "tasks.B.agent");
  j = base;
  j["tasks"]["A"]["status"] = "completed";
  expect(j, "tasks.A.data");
  j = base;
  j.erase("tasks");
  expect(j, "tasks");
  CHECK_THROWS_AS(WorkflowState::from_json("{not json"), ParseError);
}

TEST_CASE("non-string data is stored as its JSON text") {
  const char* doc = R"({"tasks": {"A": {"requirement": "r", "status": "completed",
                       "data": {"k": [1, 2]}, "child": [], "agent": "w"}}})";
  auto s = WorkflowState::from_json(doc).state;
  CHECK(s.at("A").data == std::string(R"({"k":[1,2]})"));
}

namespace {

StructuralUpdate proposal_from(const WorkflowState& s) {
  StructuralUpdate u;
  for (const auto& [id, rec] : s.records()) u.tasks[id] = {rec.requirement, rec.children, rec.agent, {}};
  return u;
}

}  // namespace

TEST_CASE("merge_update keeps completed work and requeues failures") {
  auto s = WorkflowState::from_graph(fixtures::workflow2(), "g");
  s.mark_in_progress("A");
  s.mark_completed("A", "a-out");
  s.mark_in_progress("B");
  s.mark_failed("B", "bad");

  auto u = proposal_from(s);
  u.tasks["E"] = {"New step", {"D"}, "writer", {}};
  u.tasks["C"].children = {"D"};
  RunLog log;
  auto out = s.merge_update(u, &log);
  CHECK(out.accepted);
  CHECK(out.changed);
  CHECK(out.added == std::vector<SubtaskId>{"E"});
  CHECK(out.removed.empty());
  CHECK(s.revision() == 1);
  CHECK(s.at("A").status == SubtaskStatus::kCompleted);
  CHECK(s.at("A").data == std::string("a-out"));
  CHECK(s.at("B").status == SubtaskStatus::kNotStarted);
  CHECK(s.at("D").num_parents_not_completed == 2);
  CHECK(s.counters_consistent());
}

TEST_CASE("merge_update resets changed requirements and archives removed output") {
  auto s = WorkflowState::from_graph(fixtures::workflow2(), "g");
  s.mark_in_progress("A");
  s.mark_completed("A", "a-out");
  s.mark_in_progress("B");
  s.mark_completed("B", "b-out");

  auto u = proposal_from(s);
  u.tasks["B"].requirement = "Collect better references";
  u.tasks.erase("A");
  RunLog log;
  auto out = s.merge_update(u, &log);
  CHECK(out.reset == std::vector<SubtaskId>{"B"});
  CHECK(out.removed == std::vector<SubtaskId>{"A"});
  CHECK_FALSE(s.contains("A"));
  CHECK(s.at("B").status == SubtaskStatus::kNotStarted);
  CHECK_FALSE(s.at("B").data.has_value());
  CHECK(s.at("C").num_parents_not_completed == 1);
  auto events = log.events();
  REQUIRE(events.size() == 1);
  CHECK(events[0].detail.find("a-out") != std::string::npos);
}

TEST_CASE("merge_update resets a running subtask that gains an unfinished parent") {
  auto s = WorkflowState::from_graph(fixtures::workflow2(), "g");
  s.mark_in_progress("A");
  auto u = proposal_from(s);
  u.tasks["B"].children = {"A", "C"};
  auto out = s.merge_update(u);
  CHECK(out.reset == std::vector<SubtaskId>{"A"});
  CHECK(s.at("A").status == SubtaskStatus::kNotStarted);
  CHECK(s.at("A").num_parents_not_completed == 1);
}

TEST_CASE("structurally invalid proposals are rejected whole") {
  auto s = WorkflowState::from_graph(fixtures::workflow2(), "g");
  auto before = s;
  auto u = proposal_from(s);
  u.tasks["D"].children = {"A"};
  RunLog log;
  auto out = s.merge_update(u, &log);
  CHECK_FALSE(out.accepted);
  CHECK(out.diagnosis.find("cycle") != std::string::npos);
  CHECK(s == before);
  REQUIRE(log.size() == 1);
  CHECK(log.events()[0].kind == EventKind::kNoChange);

  auto empty = s.merge_update(StructuralUpdate{});
  CHECK(empty.accepted);
  CHECK_FALSE(empty.changed);
  CHECK(s.revision() == 0);
}

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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flow {

using SubtaskId = std::string;

struct AgentRole {
  std::string name;
  std::string persona;  // may be empty for simulated runs

  bool operator==(const AgentRole&) const = default;
};

struct Vertex {
  SubtaskId id;
  std::string requirement;
  AgentRole agent;

  bool operator==(const Vertex&) const = default;
};

struct Edge {
  SubtaskId from;
  SubtaskId to;

  auto operator<=>(const Edge&) const = default;
};

// An activity-on-vertex workflow: subtasks as vertices, precedence as edges.
//
// Construction never rejects input; call validate() to find out whether the
// graph is well-formed. Operations that need a DAG throw ValidationError on
// an invalid graph. Instances are immutable once built.
class AovGraph {
 public:
  AovGraph() = default;
  AovGraph(std::vector<Vertex> vertices, std::vector<Edge> edges);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }

  const Vertex* find(const SubtaskId& id) const;
  bool contains(const SubtaskId& id) const { return find(id) != nullptr; }
  bool has_edge(const SubtaskId& from, const SubtaskId& to) const;

  // Immediate predecessors / successors, sorted by id. Only meaningful on a
  // graph whose edge endpoints resolve.
  std::vector<SubtaskId> parents(const SubtaskId& id) const;
  std::vector<SubtaskId> children(const SubtaskId& id) const;

  // Returns a copy with one more edge; does not check the result.
  AovGraph with_edge(Edge edge) const;
  // Sorted ids.
  std::vector<SubtaskId> ids() const;

  bool operator==(const AovGraph& other) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::map<SubtaskId, std::size_t> index_;
};

enum class ViolationKind {
  kCycle,
  kDanglingEndpoint,
  kSelfLoop,
  kMissingAgent,
  kMissingRequirement,
  kDuplicateId,
  kEmptyId,
};

struct Violation {
  ViolationKind kind;
  // Offending ids: the witness cycle (in order) for kCycle, otherwise the
  // single offending id.
  std::vector<SubtaskId> ids;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  const Violation* first(ViolationKind kind) const;
  std::string summary() const;
};

ValidationReport validate(const AovGraph& graph);

// Throws ValidationError carrying the report summary if the graph is invalid.
void require_valid(const AovGraph& graph);

struct ExecutionPlan {
  std::vector<std::vector<SubtaskId>> levels;  // each level sorted by id
  std::map<SubtaskId, std::size_t> order;      // 1-based linear position

  std::size_t level_count() const { return levels.size(); }
  std::size_t level_of(const SubtaskId& id) const;  // 0-based
};

// Earliest-start leveling: a vertex sits one level below its deepest parent.
ExecutionPlan topological_levels(const AovGraph& graph);

struct GraphMetrics {
  double parallelism_avg = 0.0;
  double dependency_complexity = 0.0;
  std::size_t level_count = 0;
  double mean_degree = 0.0;
};

double parallelism_average(const AovGraph& graph);
double dependency_complexity(const AovGraph& graph);

// Total degree (in + out) per vertex, in vertices() order.
std::vector<std::size_t> total_degrees(const AovGraph& graph);

// All metrics at once. An empty graph yields all zeros and, when a warnings
// vector is given, a warning entry.
GraphMetrics compute_metrics(const AovGraph& graph,
                             std::vector<std::string>* warnings = nullptr);

inline constexpr double kMetricTieTolerance = 1e-9;

struct CandidateEvaluation {
  std::size_t index = 0;
  bool valid = false;
  std::optional<GraphMetrics> metrics;
  std::string diagnosis;  // why it was dropped, when invalid
};

struct SelectionReport {
  std::size_t winner = 0;
  std::vector<CandidateEvaluation> candidates;
  std::vector<std::string> warnings;
};

// Picks the candidate with the highest parallelism; ties (within
// kMetricTieTolerance) go to the lowest dependency complexity, then to the
// lowest index. Invalid candidates are dropped with a warning. Throws
// PlanningError if no candidate is valid.
SelectionReport select_candidate(const std::vector<AovGraph>& candidates);

// Same rule over precomputed metrics; every entry must be present. Returns
// the winning position.
std::size_t select_by_metrics(const std::vector<GraphMetrics>& metrics);

}  // namespace flow

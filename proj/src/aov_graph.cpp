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

#include "aov_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace flow {

AovGraph::AovGraph(std::vector<Vertex> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    index_.emplace(vertices_[i].id, i);  // first occurrence wins
}

const Vertex* AovGraph::find(const SubtaskId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &vertices_[it->second];
}

bool AovGraph::has_edge(const SubtaskId& from, const SubtaskId& to) const {
  return std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
    return e.from == from && e.to == to;
  });
}

std::vector<SubtaskId> AovGraph::parents(const SubtaskId& id) const {
  std::set<SubtaskId> out;
  for (const auto& e : edges_)
    if (e.to == id) out.insert(e.from);
  return {out.begin(), out.end()};
}

std::vector<SubtaskId> AovGraph::children(const SubtaskId& id) const {
  std::set<SubtaskId> out;
  for (const auto& e : edges_)
    if (e.from == id) out.insert(e.to);
  return {out.begin(), out.end()};
}

AovGraph AovGraph::with_edge(Edge edge) const {
  auto edges = edges_;
  edges.push_back(std::move(edge));
  return AovGraph(vertices_, std::move(edges));
}

std::vector<SubtaskId> AovGraph::ids() const {
  std::vector<SubtaskId> out;
  out.reserve(index_.size());
  for (const auto& [id, _] : index_) out.push_back(id);
  return out;
}

bool AovGraph::operator==(const AovGraph& other) const {
  auto sorted_vertices = [](std::vector<Vertex> v) {
    std::sort(v.begin(), v.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    return v;
  };
  auto edge_set = [](const std::vector<Edge>& e) {
    return std::set<Edge>(e.begin(), e.end());
  };
  return sorted_vertices(vertices_) == sorted_vertices(other.vertices_) &&
         edge_set(edges_) == edge_set(other.edges_);
}

bool ValidationReport::has(ViolationKind kind) const {
  return first(kind) != nullptr;
}

const Violation* ValidationReport::first(ViolationKind kind) const {
  for (const auto& v : violations)
    if (v.kind == kind) return &v;
  return nullptr;
}

std::string ValidationReport::summary() const {
  if (ok()) return "graph is well-formed";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << violations[i].message;
  }
  return out.str();
}

namespace {

// Adjacency over the well-formed part of the graph (resolvable, non-loop
// edges, deduplicated), keyed by id.
std::map<SubtaskId, std::vector<SubtaskId>> adjacency(const AovGraph& g) {
  std::map<SubtaskId, std::set<SubtaskId>> sets;
  for (const auto& id : g.ids()) sets[id];
  for (const auto& e : g.edges()) {
    if (e.from == e.to || !g.contains(e.from) || !g.contains(e.to)) continue;
    sets[e.from].insert(e.to);
  }
  std::map<SubtaskId, std::vector<SubtaskId>> out;
  for (auto& [id, s] : sets) out[id] = {s.begin(), s.end()};
  return out;
}

std::optional<std::vector<SubtaskId>> find_cycle(
    const std::map<SubtaskId, std::vector<SubtaskId>>& adj) {
  enum Color { kWhite, kGrey, kBlack };
  std::map<SubtaskId, Color> color;
  std::vector<SubtaskId> stack;
  std::optional<std::vector<SubtaskId>> cycle;

  std::function<bool(const SubtaskId&)> visit = [&](const SubtaskId& u) {
    color[u] = kGrey;
    stack.push_back(u);
    for (const auto& v : adj.at(u)) {
      if (color[v] == kGrey) {
        auto start = std::find(stack.begin(), stack.end(), v);
        cycle.emplace(start, stack.end());
        return true;
      }
      if (color[v] == kWhite && visit(v)) return true;
    }
    stack.pop_back();
    color[u] = kBlack;
    return false;
  };
  for (const auto& [id, _] : adj)
    if (color[id] == kWhite && visit(id)) break;
  return cycle;
}

std::string join(const std::vector<SubtaskId>& ids, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

}  // namespace

ValidationReport validate(const AovGraph& graph) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::vector<SubtaskId> ids,
                 std::string message) {
    report.violations.push_back({kind, std::move(ids), std::move(message)});
  };

  std::set<SubtaskId> seen;
  for (const auto& v : graph.vertices()) {
    if (v.id.empty()) add(ViolationKind::kEmptyId, {v.id}, "empty subtask id");
    if (!seen.insert(v.id).second)
      add(ViolationKind::kDuplicateId, {v.id}, "duplicate id '" + v.id + "'");
    if (v.agent.name.empty())
      add(ViolationKind::kMissingAgent, {v.id},
          "subtask '" + v.id + "' has no agent");
    if (v.requirement.empty())
      add(ViolationKind::kMissingRequirement, {v.id},
          "subtask '" + v.id + "' has no requirement");
  }
  std::set<SubtaskId> dangling;
  for (const auto& e : graph.edges()) {
    for (const auto* end : {&e.from, &e.to}) {
      if (!graph.contains(*end) && dangling.insert(*end).second)
        add(ViolationKind::kDanglingEndpoint, {*end},
            "edge endpoint '" + *end + "' is not a subtask");
    }
    if (e.from == e.to)
      add(ViolationKind::kSelfLoop, {e.from},
          "self-loop on '" + e.from + "'");
  }
  if (auto cycle = find_cycle(adjacency(graph))) {
    add(ViolationKind::kCycle, *cycle, "cycle " + join(*cycle, " -> ") +
                                           " -> " + cycle->front());
  }
  return report;
}

void require_valid(const AovGraph& graph) {
  auto report = validate(graph);
  if (!report.ok()) throw ValidationError("invalid workflow graph: " + report.summary());
}

std::size_t ExecutionPlan::level_of(const SubtaskId& id) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (std::binary_search(levels[i].begin(), levels[i].end(), id)) return i;
  throw MissingKeyError("subtask '" + id + "' is not in the plan");
}

ExecutionPlan topological_levels(const AovGraph& graph) {
  require_valid(graph);
  auto adj = adjacency(graph);
  std::map<SubtaskId, std::size_t> indegree, depth;
  for (const auto& [id, _] : adj) indegree[id] = 0;
  for (const auto& [_, succ] : adj)
    for (const auto& v : succ) ++indegree[v];

  std::vector<SubtaskId> frontier;
  for (const auto& [id, d] : indegree)
    if (d == 0) frontier.push_back(id);
  for (const auto& id : frontier) depth[id] = 0;

  // Kahn's algorithm; depth is the longest path from any source.
  std::size_t processed = 0;
  while (!frontier.empty()) {
    auto u = frontier.back();
    frontier.pop_back();
    ++processed;
    for (const auto& v : adj[u]) {
      depth[v] = std::max(depth[v], depth[u] + 1);
      if (--indegree[v] == 0) frontier.push_back(v);
    }
  }
  if (processed != adj.size())
    throw ValidationError("invalid workflow graph: cycle detected");

  ExecutionPlan plan;
  std::size_t max_depth = 0;
  for (const auto& [_, d] : depth) max_depth = std::max(max_depth, d);
  if (!depth.empty()) plan.levels.resize(max_depth + 1);
  for (const auto& [id, d] : depth) plan.levels[d].push_back(id);  // map order = sorted
  std::size_t pos = 0;
  for (const auto& level : plan.levels)
    for (const auto& id : level) plan.order[id] = ++pos;
  return plan;
}

double parallelism_average(const AovGraph& graph) {
  auto plan = topological_levels(graph);
  if (plan.level_count() == 0) return 0.0;
  std::size_t total = 0;
  for (const auto& level : plan.levels) total += level.size();
  return static_cast<double>(total) / static_cast<double>(plan.level_count());
}

std::vector<std::size_t> total_degrees(const AovGraph& graph) {
  auto adj = adjacency(graph);
  std::map<SubtaskId, std::size_t> deg;
  for (const auto& [u, succ] : adj) {
    deg[u] += succ.size();
    for (const auto& v : succ) ++deg[v];
  }
  std::vector<std::size_t> out;
  out.reserve(graph.size());
  for (const auto& v : graph.vertices()) out.push_back(deg[v.id]);
  return out;
}

double dependency_complexity(const AovGraph& graph) {
  require_valid(graph);
  auto deg = total_degrees(graph);
  if (deg.empty()) return 0.0;
  const double n = static_cast<double>(deg.size());
  const double mean = std::accumulate(deg.begin(), deg.end(), 0.0) / n;
  double ss = 0.0;
  for (auto d : deg) ss += (static_cast<double>(d) - mean) * (static_cast<double>(d) - mean);
  return std::sqrt(ss / n);
}

GraphMetrics compute_metrics(const AovGraph& graph,
                             std::vector<std::string>* warnings) {
  require_valid(graph);
  GraphMetrics m;
  if (graph.empty()) {
    if (warnings) warnings->push_back("empty workflow: metrics defined as zero");
    return m;
  }
  auto plan = topological_levels(graph);
  m.level_count = plan.level_count();
  m.parallelism_avg = parallelism_average(graph);
  m.dependency_complexity = dependency_complexity(graph);
  auto deg = total_degrees(graph);
  m.mean_degree = std::accumulate(deg.begin(), deg.end(), 0.0) /
                  static_cast<double>(deg.size());
  return m;
}

std::size_t select_by_metrics(const std::vector<GraphMetrics>& metrics) {
  if (metrics.empty()) throw PlanningError("no candidates to select from");
  double best_p = metrics.front().parallelism_avg;
  for (const auto& m : metrics) best_p = std::max(best_p, m.parallelism_avg);
  auto in_top = [&](const GraphMetrics& m) {
    return m.parallelism_avg >= best_p - kMetricTieTolerance;
  };
  double best_c = INFINITY;
  for (const auto& m : metrics)
    if (in_top(m)) best_c = std::min(best_c, m.dependency_complexity);
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (in_top(metrics[i]) &&
        metrics[i].dependency_complexity <= best_c + kMetricTieTolerance)
      return i;
  }
  return 0;  // unreachable: the minimum is attained
}

SelectionReport select_candidate(const std::vector<AovGraph>& candidates) {
  SelectionReport report;
  std::vector<GraphMetrics> valid_metrics;
  std::vector<std::size_t> valid_index;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    CandidateEvaluation eval;
    eval.index = i;
    auto v = validate(candidates[i]);
    if (v.ok()) {
      eval.valid = true;
      eval.metrics = compute_metrics(candidates[i], &report.warnings);
      valid_metrics.push_back(*eval.metrics);
      valid_index.push_back(i);
    } else {
      eval.diagnosis = v.summary();
      report.warnings.push_back("candidate " + std::to_string(i) +
                                " dropped: " + eval.diagnosis);
    }
    report.candidates.push_back(std::move(eval));
  }
  if (valid_metrics.empty())
    throw PlanningError("no valid candidate workflow among " +
                        std::to_string(candidates.size()));
  report.winner = valid_index[select_by_metrics(valid_metrics)];
  return report;
}

}  // namespace flow

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
#include <vector>

#include "aov_graph.hpp"

namespace flow::reliability {

// Every subtask fails independently with probability p_f.
struct FailureModel {
  double p_f = 0.1;

  void validate() const;  // throws InvalidArgument unless 0 < p_f < 1
};

enum class Method { kRecursion, kEnumeration, kMonteCarlo };
const char* method_token(Method m);

inline constexpr std::size_t kEnumerationCap = 20;
inline constexpr std::size_t kDefaultTrials = 100000;

struct SimResult {
  double expected_completed = 0.0;
  std::map<SubtaskId, double> per_node;
  Method method = Method::kRecursion;
  std::optional<std::size_t> trials;
  std::optional<double> std_error;
  std::optional<std::uint64_t> seed;
};

// P(v) = (1 - p_f) * prod over parents of P(parent). Treats parent
// successes as independent, which overstates failure when parents share
// ancestors.
std::map<SubtaskId, double> success_probabilities_recursion(const AovGraph& graph,
                                                            const FailureModel& model);

// enumeration and monte_carlo use trajectory semantics: a subtask completes
// iff its own coin succeeds and every ancestor completed. Monte Carlo coins
// are keyed by (seed, trial, vertex index), so two graphs over the same
// vertex list see common random numbers and the result does not depend on
// how trials are spread over threads.
SimResult expected_completed(const AovGraph& graph, const FailureModel& model, Method method,
                             std::size_t trials = kDefaultTrials, std::uint64_t seed = 0);

struct DagSpec {
  std::size_t n = 10;
  double edge_probability = 0.3;
  std::uint64_t seed = 0;
};

// Vertices t01..tN; each forward edge (i, j), i < j, is kept independently.
AovGraph random_dag(const DagSpec& spec);
// Each vertex after the first is a root with probability root_probability,
// otherwise the child of a uniformly chosen earlier vertex.
AovGraph random_out_forest(std::size_t n, std::uint64_t seed, double root_probability = 0.3);

// Input plus edge (b, v_star). Throws ValidationError on a duplicate edge or
// a cycle, InvalidArgument on unknown ids.
AovGraph add_dependency(const AovGraph& graph, const SubtaskId& b, const SubtaskId& v_star);

bool is_ancestor(const AovGraph& graph, const SubtaskId& a, const SubtaskId& v);

// Ordered pairs (b, v) whose edge is absent and would not close a cycle.
std::vector<Edge> admissible_edges(const AovGraph& graph);

struct Theorem1Row {
  std::size_t pair = 0;
  std::size_t n = 0;
  double p_f = 0.0;
  SubtaskId b;
  SubtaskId v_star;
  double e_rec_a = 0.0;
  double e_rec_b = 0.0;
  double delta = 0.0;
  // P_A(v*) * (1 - P_A(b)), and the recursion drop at v* itself.
  double predicted_delta = 0.0;
  double node_delta = 0.0;
  std::optional<double> mc_a, mc_b, mc_se_a, mc_se_b;
  bool b_was_ancestor = false;
  bool v_star_is_sink = false;
  bool recursion_violation = false;
  bool trajectory_violation = false;
};

struct Theorem1Report {
  FailureModel model;
  std::vector<Theorem1Row> rows;
  std::vector<std::string> skipped;

  std::size_t recursion_violations() const;
  std::size_t trajectory_violations() const;
  std::string to_csv() const;
  std::string summary() const;
};

// Pair i uses DAG seed splitmix64(spec.seed + i). trials == 0 skips the
// Monte Carlo columns.
Theorem1Report theorem1_experiment(const DagSpec& spec, const FailureModel& model,
                                   std::size_t pairs, std::size_t trials);

}  // namespace flow::reliability

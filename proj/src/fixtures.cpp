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

#include "fixtures.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "workflow_state.hpp"

namespace flow::fixtures {
namespace {

std::vector<Vertex> four_subtasks() {
  return {
      {"A", "Draft the content outline", {"researcher", ""}},
      {"B", "Collect the reference material", {"researcher", ""}},
      {"C", "Write the main body from the outline and references", {"writer", ""}},
      {"D", "Assemble and review the final deliverable", {"reviewer", ""}},
  };
}

}  // namespace

AovGraph workflow1() {
  return AovGraph(four_subtasks(),
                  {{"A", "C"}, {"B", "C"}, {"A", "D"}, {"B", "D"}, {"C", "D"}});
}

AovGraph workflow2() {
  return AovGraph(four_subtasks(), {{"A", "C"}, {"B", "C"}, {"C", "D"}});
}

AovGraph workflow3() {
  return AovGraph(four_subtasks(), {{"A", "B"}, {"B", "C"}, {"C", "D"}});
}

std::string candidate_text(const AovGraph& graph, const std::string& goal) {
  return WorkflowState::from_graph(graph, goal).to_json();
}

std::vector<std::string> default_candidate_texts() {
  return {candidate_text(workflow1()), candidate_text(workflow2()),
          candidate_text(workflow3())};
}

std::vector<std::string> load_candidate_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read fixture file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("fixture file '" + path.string() + "': " + e.what());
  }
  std::vector<std::string> out;
  if (doc.is_array()) {
    for (const auto& item : doc) out.push_back(item.dump(2));
  } else {
    out.push_back(doc.dump(2));
  }
  if (out.empty()) throw ParseError("fixture file '" + path.string() + "' is empty");
  return out;
}

std::vector<SubtaskId> masked_blocking_choices() {
  std::vector<SubtaskId> out;
  auto g = workflow2();
  for (const auto& id : g.ids())
    if (!g.children(id).empty()) out.push_back(id);
  return out;
}

}  // namespace flow::fixtures

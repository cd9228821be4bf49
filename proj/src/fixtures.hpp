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

#include <filesystem>
#include <string>
#include <vector>

#include "aov_graph.hpp"

namespace flow::fixtures {

// The three four-subtask example workflows used throughout the tests:
//   1: A->C, B->C, A->D, B->D, C->D
//   2: A->C, B->C, C->D
//   3: A->B->C->D
AovGraph workflow1();
AovGraph workflow2();
AovGraph workflow3();

// Snapshot-format texts of workflows 1, 2, 3, in that order.
std::vector<std::string> default_candidate_texts();

// Snapshot text for an arbitrary graph.
std::string candidate_text(const AovGraph& graph, const std::string& goal = {});

// A fixture file holds either one workflow document or a JSON array of them;
// each element comes back as raw response text. Throws IoError / ParseError.
std::vector<std::string> load_candidate_file(const std::filesystem::path& path);

// Subtasks of workflow 2 that have at least one descendant, sorted.
std::vector<SubtaskId> masked_blocking_choices();

}  // namespace flow::fixtures

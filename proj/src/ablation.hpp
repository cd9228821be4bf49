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
#include <string>
#include <vector>

#include "aov_graph.hpp"
#include "executor.hpp"

namespace flow {

// Masking ablation on workflow 2: each seed masks one subtask that blocks a
// descendant, then runs once with refinement and once without.
struct AblationConfig {
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  int max_refinement_rounds = 10;
  UpdateStrategy strategy = UpdateStrategy::kBatchUpdate;
  std::string sentinel = "none";
};

struct AblationRow {
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  SubtaskId masked;
  Outcome with_update = Outcome::kFailure;
  Outcome without_update = Outcome::kFailure;
  int repair_rounds = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;

  double success_rate_with_update() const;
  double success_rate_without_update() const;
  std::string to_csv() const;
  std::string summary() const;
};

// The id masked for a given seed.
SubtaskId ablation_mask_choice(std::uint64_t seed);

AblationReport run_ablation(const AblationConfig& config);

}  // namespace flow

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
#include <set>
#include <string>

#include "aov_graph.hpp"

namespace flow {

// Replaces subtask outputs with a sentinel before they reach downstream
// agents. Ids in mask_ids are masked on their first attempt only; every
// attempt is additionally masked with mask_probability, drawn from a
// counter-based stream keyed by (seed, id, attempt).
struct FaultInjector {
  std::set<SubtaskId> mask_ids;
  double mask_probability = 0.0;
  std::string sentinel = "none";
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument
  bool should_mask(const SubtaskId& id, std::size_t attempt = 0) const;
  std::string inject(const SubtaskId& id, const std::string& output,
                     std::size_t attempt = 0) const;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_id(const std::string& id);
// Uniform in [0, 1) from 53 high bits.
double unit_interval(std::uint64_t bits);

}  // namespace flow

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

#include "fault_injector.hpp"

#include "errors.hpp"

namespace flow {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

void FaultInjector::validate() const {
  if (!(mask_probability >= 0.0 && mask_probability <= 1.0))
    throw InvalidArgument("mask_probability must be in [0, 1]");
}

bool FaultInjector::should_mask(const SubtaskId& id, std::size_t attempt) const {
  if (attempt == 0 && mask_ids.count(id)) return true;
  if (mask_probability <= 0.0) return false;
  auto bits = splitmix64(splitmix64(seed ^ hash_id(id)) + attempt);
  return unit_interval(bits) < mask_probability;
}

std::string FaultInjector::inject(const SubtaskId& id, const std::string& output,
                                  std::size_t attempt) const {
  return should_mask(id, attempt) ? sentinel : output;
}

}  // namespace flow

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

#include "log.hpp"

#include <iostream>
#include <mutex>
#include <vector>

namespace flow::log {
namespace {

struct Registry {
  std::mutex mu;
  Sink sink;
  Level min_level = Level::kInfo;
  std::vector<std::string> secrets;
};

Registry& registry() {
  static Registry r;
  return r;
}

std::string redact_locked(const Registry& r, std::string line) {
  for (const auto& secret : r.secrets) {
    if (secret.empty()) continue;
    for (auto pos = line.find(secret); pos != std::string::npos;
         pos = line.find(secret, pos + 3)) {
      line.replace(pos, secret.size(), "***");
    }
  }
  return line;
}

}  // namespace

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "?";
}

Sink set_sink(Sink sink) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::swap(r.sink, sink);
  return sink;
}

void set_level(Level level) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.min_level = level;
}

void register_secret(std::string secret) {
  if (secret.empty()) return;
  auto& r = registry();
  std::lock_guard lock(r.mu);
  for (const auto& s : r.secrets)
    if (s == secret) return;
  r.secrets.push_back(std::move(secret));
}

std::string redact(std::string line) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  return redact_locked(r, std::move(line));
}

void write(Level level, std::string_view message) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  if (level < r.min_level) return;
  auto line = redact_locked(r, std::string(message));
  if (r.sink) {
    r.sink(level, line);
  } else {
    std::cerr << "[flow " << level_name(level) << "] " << line << '\n';
  }
}

}  // namespace flow::log

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

#include <functional>
#include <string>
#include <string_view>

namespace flow::log {

enum class Level { kDebug, kInfo, kWarn, kError };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink. Passing an empty function restores the
// default stderr sink. Returns the previous sink.
Sink set_sink(Sink sink);

// Minimum level forwarded to the sink (default: kInfo).
void set_level(Level level);

// Registers a secret; every later line has each registered secret replaced
// by "***" before it reaches the sink.
void register_secret(std::string secret);

std::string redact(std::string line);

void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::kDebug, m); }
inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void warn(std::string_view m) { write(Level::kWarn, m); }
inline void error(std::string_view m) { write(Level::kError, m); }

const char* level_name(Level level);

}  // namespace flow::log

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
#include <map>
#include <string>

namespace flow::cli {

using Settings = std::map<std::string, std::string>;

// Reads `key = value` lines. Blank lines, `#` comments and `[section]`
// headers are skipped; values may be wrapped in double quotes. Keys are
// returned with dashes turned into underscores. Throws std::runtime_error
// naming the file and line on malformed input.
Settings load_config_file(const std::filesystem::path& path);

// Provider settings from FLOW_API_KEY, FLOW_API_BASE and FLOW_MODEL.
Settings env_settings();

// file < env < flags.
Settings merge_settings(const Settings& file, const Settings& env, const Settings& flags);

}  // namespace flow::cli

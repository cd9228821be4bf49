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

#include "cli_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace flow::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Settings load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  Settings out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (text.front() == '[' && text.back() == ']') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected key = value");
    auto key = trim(text.substr(0, eq));
    auto value = trim(text.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = value;
  }
  return out;
}

Settings env_settings() {
  Settings out;
  const std::pair<const char*, const char*> vars[] = {
      {"FLOW_API_KEY", "api_key"}, {"FLOW_API_BASE", "api_base"}, {"FLOW_MODEL", "model"}};
  for (const auto& [var, key] : vars)
    if (const char* v = std::getenv(var); v != nullptr && *v != '\0') out[key] = v;
  return out;
}

Settings merge_settings(const Settings& file, const Settings& env, const Settings& flags) {
  Settings out = file;
  for (const auto& [k, v] : env) out[k] = v;
  for (const auto& [k, v] : flags) out[k] = v;
  return out;
}

}  // namespace flow::cli

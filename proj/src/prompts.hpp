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
#include <string_view>

namespace flow::prompts {

// Prompt templates with {{name}} placeholders. The defaults are compiled in
// from prompts/*.txt; a directory holding edited copies can replace them.
struct Templates {
  std::string init;
  std::string update;
  std::string verify;
  std::string agent;

  static Templates defaults();
  // Missing files fall back to the default for that template.
  static Templates load_dir(const std::filesystem::path& dir);
};

// Substitutes every {{key}}; unknown placeholders are left as they are.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

// Output-format exemplar shown to planners, in the canonical snapshot schema.
const std::string& format_exemplar();

}  // namespace flow::prompts

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

#include "prompts.hpp"

#include <fstream>
#include <sstream>

#include "flow_prompt_defaults.hpp"

namespace flow::prompts {

Templates Templates::defaults() {
  return {k_init_template, k_update_template, k_verify_template, k_agent_template};
}

Templates Templates::load_dir(const std::filesystem::path& dir) {
  auto t = defaults();
  auto read = [&](const char* name, std::string& into) {
    std::ifstream in(dir / (std::string(name) + ".txt"), std::ios::binary);
    if (!in) return;
    std::ostringstream ss;
    ss << in.rdbuf();
    into = ss.str();
  };
  read("init", t.init);
  read("update", t.update);
  read("verify", t.verify);
  read("agent", t.agent);
  return t;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    std::string key(tmpl.substr(open + 2, close - open - 2));
    if (auto it = values.find(key); it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

const std::string& format_exemplar() {
  static const std::string text =
      R"({ "Task_A": { "requirement": "what Task_A must produce", "status": "not_started", "data": null, "num_parents_not_completed": 0, "child": ["Task_B", "Task_C"], "agent": "Agent_1" }, )"
      R"("Task_B": { "requirement": "what Task_B must produce", "status": "not_started", "data": null, "num_parents_not_completed": 1, "child": ["Task_D"], "agent": "Agent_2" }, ... })"
      "\n"
      R"(Each key is a task id. "child" lists the tasks that depend on this one ("next" is accepted as an alias, and "subtask requirement" as an alias of "requirement"). )"
      R"("status" is one of not_started, in_progress, completed, failed. Return only the JSON object.)";
  return text;
}

}  // namespace flow::prompts

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

#include "planner.hpp"

#include <algorithm>
#include <cctype>

#include "errors.hpp"
#include "log.hpp"

namespace flow {

using nlohmann::json;

void PlannerConfig::validate() const {
  if (k < 1) throw InvalidArgument("planner k must be >= 1");
  if (temperature < 0.0 || temperature > 2.0)
    throw InvalidArgument("planner temperature must be in [0, 2]");
  if (verify_temperature < 0.0 || verify_temperature > 2.0)
    throw InvalidArgument("verify temperature must be in [0, 2]");
  if (max_parse_retries < 0) throw InvalidArgument("max_parse_retries must be >= 0");
}

std::string build_init_prompt(const TaskSpec& task, const PlannerConfig&,
                              const prompts::Templates& templates) {
  auto prompt = prompts::render(templates.init, {{"task", task.requirement},
                                                 {"format", prompts::format_exemplar()}});
  if (!task.constraints.empty()) {
    while (!prompt.empty() && prompt.back() == '\n') prompt.pop_back();
    prompt += "\n\nRole constraints:\n";
    for (const auto& c : task.constraints) prompt += "- " + c + "\n";
  }
  return prompt;
}

namespace {

std::string serialize_within_budget(const WorkflowState& state, std::size_t budget) {
  auto doc = state.to_json_value();
  auto text = doc.dump(2);
  for (const auto& id : state.completion_order()) {
    if (text.size() <= budget) break;
    doc["tasks"][id]["data"] = kTruncationMarker;
    text = doc.dump(2);
  }
  return text;
}

}  // namespace

std::string build_update_prompt(const TaskSpec& task, const WorkflowState& state,
                                const PlannerConfig& config,
                                const prompts::Templates& templates) {
  return prompts::render(templates.update,
                         {{"task", task.requirement},
                          {"state", serialize_within_budget(state, config.context_budget)},
                          {"format", prompts::format_exemplar()}});
}

std::string build_verify_prompt(const TaskSpec& task, const SubtaskId& id,
                                const SubtaskRecord& record,
                                const prompts::Templates& templates) {
  return prompts::render(templates.verify, {{"task", task.requirement},
                                            {"subtask", id},
                                            {"requirement", record.requirement},
                                            {"output", record.data.value_or("(no output)")}});
}

namespace {

// End of the balanced object starting at `open`, or npos.
std::size_t match_object(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

json first_json_object(std::string_view text) {
  for (auto open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    auto close = match_object(text, open);
    if (close == std::string_view::npos) continue;
    try {
      auto doc = json::parse(text.substr(open, close - open + 1));
      if (doc.is_object()) return doc;
    } catch (const json::parse_error&) {
    }
  }
  throw ParseError("no JSON object found");
}

const json& task_object(const json& doc) {
  if (auto it = doc.find("tasks");
      it != doc.end() && it->is_object() &&
      (doc.size() == 1 || doc.contains("goal") || doc.contains("revision")))
    return *it;
  return doc;
}

}  // namespace

PlannerResponse parse_workflow_response(std::string_view text, ResponseContext context,
                                        std::vector<std::string>* warnings) {
  auto doc = first_json_object(text);
  const json& tasks = task_object(doc);
  if (tasks.empty()) {
    if (context == ResponseContext::kUpdate) return NoChange{};
    throw ParseError("empty workflow: at least one subtask is required");
  }

  std::map<SubtaskId, RawTask> raw;
  try {
    raw = parse_task_map(tasks);
  } catch (const ParseError& e) {
    throw ParseError(std::string("schema violation: ") + e.what());
  }

  StructuralUpdate update;
  for (auto& [id, task] : raw) {
    ProposedRecord rec;
    if (task.requirement && !task.requirement->empty()) {
      rec.requirement = *task.requirement;
    } else {
      rec.requirement = id;
      if (warnings) warnings->push_back("tasks." + id + ": no requirement, using the id");
    }
    if (!task.agent || task.agent->empty())
      throw ParseError("schema violation: tasks." + id + ".agent is missing");
    rec.agent = *task.agent;
    rec.children = task.children;
    rec.status = task.status;
    update.tasks.emplace(id, std::move(rec));
  }

  auto report = validate(update.to_graph());
  if (auto* cycle = report.first(ViolationKind::kCycle))
    throw ParseError("cyclic structure: " + cycle->message);
  if (!report.ok()) throw ParseError("schema violation: " + report.summary());

  if (context == ResponseContext::kUpdate) return update;
  return Candidates{{update.to_graph()}};
}

Verdict parse_verdict(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t j = i;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  std::string word(text.substr(i, j - i));
  std::transform(word.begin(), word.end(), word.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  Verdict v;
  if (word == "YES" || word == "PASS") v.pass = true;
  else if (word == "NO" || word == "FAIL") v.pass = false;
  else throw ParseError("verdict does not start with YES or NO");
  auto rest = text.substr(j);
  std::size_t k = 0;
  while (k < rest.size() && (std::isspace(static_cast<unsigned char>(rest[k])) ||
                             rest[k] == ':' || rest[k] == '-' || rest[k] == ',' ||
                             rest[k] == '.' || rest[k] == '*'))
    ++k;
  v.rationale = std::string(rest.substr(k));
  while (!v.rationale.empty() && std::isspace(static_cast<unsigned char>(v.rationale.back())))
    v.rationale.pop_back();
  return v;
}

InitialPlan plan_initial(Planner& planner, const TaskSpec& task, const PlannerConfig& config) {
  config.validate();
  InitialPlan plan;
  std::vector<AovGraph> usable;
  std::vector<std::size_t> slot_of;
  for (int sample = 0; sample < config.k; ++sample) {
    std::string feedback;
    std::optional<AovGraph> graph;
    for (int attempt = 0; attempt <= config.max_parse_retries && !graph; ++attempt) {
      try {
        auto text = planner.initial_response(task, config, sample, feedback);
        auto parsed = parse_workflow_response(text, ResponseContext::kInitial, &plan.warnings);
        graph = std::get<Candidates>(parsed).graphs.front();
      } catch (const ParseError& e) {
        feedback = e.what();
        plan.warnings.push_back("candidate " + std::to_string(sample) + " attempt " +
                                std::to_string(attempt) + ": " + feedback);
      } catch (const Error& e) {
        plan.warnings.push_back("candidate " + std::to_string(sample) +
                                ": planner error: " + e.what());
        break;
      }
    }
    if (graph) {
      slot_of.push_back(plan.candidates.size());
      usable.push_back(*graph);
    }
    plan.candidates.push_back(std::move(graph));
  }
  for (const auto& w : plan.warnings) log::warn("plan: " + w);
  if (usable.empty())
    throw PlanningError("all " + std::to_string(config.k) +
                        " candidate workflows were unusable");

  auto inner = select_candidate(usable);
  plan.selection.warnings = inner.warnings;
  for (std::size_t slot = 0, u = 0; slot < plan.candidates.size(); ++slot) {
    if (plan.candidates[slot]) {
      auto eval = inner.candidates[u++];
      eval.index = slot;
      plan.selection.candidates.push_back(std::move(eval));
    } else {
      CandidateEvaluation eval;
      eval.index = slot;
      eval.diagnosis = "unparseable response";
      plan.selection.candidates.push_back(std::move(eval));
    }
  }
  plan.selection.winner = slot_of[inner.winner];
  plan.selected = usable[inner.winner];
  return plan;
}

UpdateDecision propose_update(Planner& planner, const TaskSpec& task, const WorkflowState& state,
                              const PlannerConfig& config) {
  config.validate();
  UpdateDecision decision;
  decision.forced_repair = state.count(SubtaskStatus::kFailed) > 0;

  std::vector<StructuralUpdate> proposals;
  std::vector<AovGraph> successors;
  for (int sample = 0; sample < config.k; ++sample) {
    ++decision.requests;
    try {
      auto text = planner.update_response(task, state, config, sample);
      auto parsed = parse_workflow_response(text, ResponseContext::kUpdate, &decision.warnings);
      if (std::holds_alternative<NoChange>(parsed)) continue;
      auto& proposal = std::get<StructuralUpdate>(parsed);
      WorkflowState trial = state;
      auto merged = trial.merge_update(proposal);
      if (!merged.accepted) {
        decision.warnings.push_back("proposal " + std::to_string(sample) + ": " +
                                    merged.diagnosis);
        continue;
      }
      successors.push_back(trial.to_graph());
      proposals.push_back(std::move(proposal));
    } catch (const Error& e) {
      decision.warnings.push_back("proposal " + std::to_string(sample) + " dropped: " + e.what());
    }
  }
  decision.successors = proposals.size();
  for (const auto& w : decision.warnings) log::warn("update: " + w);

  std::vector<AovGraph> pool;
  if (!decision.forced_repair) pool.push_back(state.to_graph());
  pool.insert(pool.end(), successors.begin(), successors.end());
  if (successors.empty()) {
    if (decision.forced_repair)
      decision.warnings.push_back("failed subtasks present but no usable repair proposed");
    return decision;
  }
  auto selection = select_candidate(pool);
  const std::size_t offset = decision.forced_repair ? 0 : 1;
  if (selection.winner >= offset)
    decision.response = proposals[selection.winner - offset];
  decision.selection = std::move(selection);
  return decision;
}

Verdict verify_completion(Planner& planner, const TaskSpec& task, const SubtaskId& id,
                          const SubtaskRecord& record, const PlannerConfig& config) {
  try {
    return parse_verdict(planner.verify_response(task, id, record, config));
  } catch (const Error& e) {
    log::warn("verify " + id + ": " + e.what() + "; treating as pass");
    return {true, std::string("verification unavailable: ") + e.what()};
  }
}

json selection_to_json(const SelectionReport& report) {
  json candidates = json::array();
  for (const auto& c : report.candidates) {
    json entry = {{"index", c.index}, {"valid", c.valid}};
    if (c.metrics) {
      entry["parallelism_avg"] = c.metrics->parallelism_avg;
      entry["dependency_complexity"] = c.metrics->dependency_complexity;
      entry["level_count"] = c.metrics->level_count;
      entry["mean_degree"] = c.metrics->mean_degree;
    }
    if (!c.diagnosis.empty()) entry["diagnosis"] = c.diagnosis;
    candidates.push_back(std::move(entry));
  }
  return {{"winner", report.winner}, {"candidates", std::move(candidates)},
          {"warnings", report.warnings}};
}

}  // namespace flow

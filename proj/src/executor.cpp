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

#include "executor.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <thread>
#include <variant>

#include "errors.hpp"
#include "log.hpp"

namespace flow {

using nlohmann::json;

const char* strategy_token(UpdateStrategy s) {
  return s == UpdateStrategy::kBatchUpdate ? "batch_update" : "concurrent_update";
}

std::optional<UpdateStrategy> parse_strategy(const std::string& token) {
  if (token == "batch_update" || token == "batch") return UpdateStrategy::kBatchUpdate;
  if (token == "concurrent_update" || token == "concurrent")
    return UpdateStrategy::kConcurrentUpdate;
  return std::nullopt;
}

const char* outcome_token(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kFailure: return "failure";
    case Outcome::kBudgetExhausted: return "budget_exhausted";
  }
  return "failure";
}

void ExecutorConfig::validate() const {
  if (max_concurrent < 1) throw InvalidArgument("max_concurrent must be >= 1");
  if (max_refinement_rounds < 0) throw InvalidArgument("max_refinement_rounds must be >= 0");
}

json RunReport::to_json() const {
  json j = {
      {"outcome", outcome_token(outcome)},
      {"planning_failed", planning_failed},
      {"refinement_rounds_used", refinement_rounds_used},
      {"repair_rounds", repair_rounds},
      {"wall_time_ms", wall_time.count()},
      {"token_usage",
       {{"prompt_tokens", token_usage.prompt_tokens},
        {"completion_tokens", token_usage.completion_tokens},
        {"total_tokens", token_usage.total_tokens}}},
      {"events", log.size()},
      {"final_state", final_state.to_json_value()},
  };
  if (!diagnosis.empty()) j["diagnosis"] = diagnosis;
  if (selection) j["selection"] = selection_to_json(*selection);
  return j;
}

Allocation allocate_agents(const std::vector<SubtaskId>& ready, const WorkflowState& state,
                           const std::map<std::string, std::string>& personas,
                           const std::set<std::pair<std::string, std::size_t>>& live) {
  Allocation out;
  auto sorted = ready;
  std::sort(sorted.begin(), sorted.end());
  auto taken = live;
  for (const auto& id : sorted) {
    const auto& rec = state.at(id);
    if (rec.agent.empty()) {
      out.errors[id] = "no agent role assigned to subtask '" + id + "'";
      continue;
    }
    std::size_t clone = 0;
    while (taken.count({rec.agent, clone})) ++clone;
    taken.insert({rec.agent, clone});
    AgentRole role{rec.agent, {}};
    if (auto it = personas.find(rec.agent); it != personas.end()) role.persona = it->second;
    out.assigned.emplace(id, AgentInstance{std::move(role), clone});
  }
  return out;
}

std::string execute_subtask(AgentBackend& backend, const AgentInstance& instance,
                            const std::string& goal, const SubtaskId& id,
                            const SubtaskRecord& record, const std::vector<Upstream>& upstream) {
  return backend.execute(instance, goal, id, record, upstream);
}

std::vector<Upstream> collect_upstream(const WorkflowState& state, const SubtaskId& id) {
  std::vector<Upstream> out;
  for (const auto& parent : state.parents_of(id)) {
    const auto& rec = state.at(parent);
    if (rec.status != SubtaskStatus::kCompleted)
      throw StateTransitionError("subtask '" + id + "' has unfinished parent '" + parent + "'");
    out.push_back({parent, rec.data.value_or("")});
  }
  return out;
}

namespace {

std::string join_ids(const std::vector<SubtaskId>& ids) {
  std::string out = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + ids[i];
  return out + "]";
}

std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Job {
  std::uint64_t token = 0;
  SubtaskId id;
  AgentInstance instance;
  std::size_t attempt = 0;
  SubtaskRecord record;
  std::vector<Upstream> upstream;
};

struct Completion {
  std::uint64_t token = 0;
  SubtaskId id;
  bool ok = false;
  bool masked = false;
  std::string output;
  std::optional<Verdict> verdict;
  std::string error;
};

struct UpdateResult {
  std::optional<UpdateDecision> decision;
  std::string error;
};

using Message = std::variant<Completion, UpdateResult>;

class Mailbox {
 public:
  void push(Message m) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(m));
    }
    cv_.notify_one();
  }
  Message pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    auto m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> queue_;
};

class Coordinator {
 public:
  Coordinator(const TaskSpec& task, Planner& planner, AgentBackend& agents,
              const PlannerConfig& pcfg, const ExecutorConfig& cfg, const RunOptions& options,
              std::map<std::string, std::string> personas, RunReport& report)
      : task_(task),
        planner_(planner),
        agents_(agents),
        pcfg_(pcfg),
        cfg_(cfg),
        options_(options),
        personas_(std::move(personas)),
        report_(report),
        state_(report.final_state),
        log_(report.log) {}

  ~Coordinator() {
    for (auto& t : threads_)
      if (t.joinable()) t.join();
  }

  Outcome run() {
    return cfg_.strategy == UpdateStrategy::kBatchUpdate ? run_batch() : run_concurrent();
  }

 private:
  Outcome run_batch() {
    for (;;) {
      auto ready = state_.ready_set();
      if (ready.empty()) {
        if (state_.all_completed()) return Outcome::kSuccess;
        if (!update_now()) return stuck_outcome();
        continue;
      }
      auto jobs = dispatch_wave(ready, ready.size());
      std::vector<Completion> results;
      std::size_t next = 0, running = 0;
      while (next < jobs.size() && running < cfg_.max_concurrent) {
        launch(std::move(jobs[next++]));
        ++running;
      }
      while (running > 0) {
        auto msg = mailbox_.pop();
        results.push_back(std::get<Completion>(std::move(msg)));
        --running;
        if (next < jobs.size()) {
          launch(std::move(jobs[next++]));
          ++running;
        }
      }
      // Applied in id order so the log does not depend on thread timing.
      std::sort(results.begin(), results.end(),
                [](const Completion& a, const Completion& b) { return a.id < b.id; });
      for (const auto& c : results) {
        inflight_.erase(c.token);
        apply(c);
      }
      if (!state_.all_completed()) update_now();
    }
  }

  Outcome run_concurrent() {
    bool planner_busy = false, pending = false;
    std::size_t outstanding = 0;
    Outcome outcome = Outcome::kFailure;
    for (;;) {
      if (outstanding < cfg_.max_concurrent) {
        auto ready = state_.ready_set();
        if (!ready.empty()) {
          auto jobs = dispatch_wave(ready, cfg_.max_concurrent - outstanding);
          for (auto& job : jobs) {
            launch(std::move(job));
            ++outstanding;
          }
        }
      }
      if (inflight_.empty() && !planner_busy) {
        if (state_.all_completed()) {
          outcome = Outcome::kSuccess;
          break;
        }
        if (state_.ready_set().empty()) {
          if (budget_left()) {
            launch_update();
            planner_busy = true;
          } else {
            outcome = stuck_outcome();
            break;
          }
        }
      }
      auto msg = mailbox_.pop();
      if (auto* c = std::get_if<Completion>(&msg)) {
        --outstanding;
        if (!inflight_.count(c->token)) {
          log_.append(EventKind::kStaleResult, state_.revision(), c->id, std::nullopt,
                      "late result for a subtask removed or reset by an update; discarded");
          continue;
        }
        inflight_.erase(c->token);
        apply(*c);
        if (!state_.all_completed()) {
          if (planner_busy) {
            pending = true;
          } else if (budget_left()) {
            launch_update();
            planner_busy = true;
          } else {
            note_budget_exhausted();
          }
        }
      } else {
        auto& result = std::get<UpdateResult>(msg);
        planner_busy = false;
        if (result.decision) {
          auto merged = apply_decision(*result.decision);
          discard_stale(merged);
        } else {
          log_.append(EventKind::kNoChange, state_.revision(), std::nullopt, std::nullopt,
                      "update failed: " + result.error);
        }
        if (pending && !state_.all_completed() && budget_left()) {
          launch_update();
          planner_busy = true;
        }
        pending = false;
      }
    }
    // Join stragglers: stale workers and a planner call still in flight.
    while (outstanding > 0 || planner_busy) {
      auto msg = mailbox_.pop();
      if (auto* c = std::get_if<Completion>(&msg)) {
        --outstanding;
        log_.append(EventKind::kStaleResult, state_.revision(), c->id, std::nullopt,
                    "late result after the run finished; discarded");
      } else {
        planner_busy = false;
      }
    }
    return outcome;
  }

  // Marks `ready` in progress (at most `cap` of them, in id order) and
  // returns their jobs.
  std::vector<Job> dispatch_wave(const std::vector<SubtaskId>& ready, std::size_t cap) {
    ++wave_;
    std::set<std::pair<std::string, std::size_t>> live;
    for (const auto& [_, job] : inflight_) live.insert({job.instance.role.name, job.instance.clone_index});
    std::vector<SubtaskId> chosen(ready.begin(),
                                  ready.begin() + static_cast<std::ptrdiff_t>(std::min(cap, ready.size())));
    auto alloc = allocate_agents(chosen, state_, personas_, live);
    std::vector<Job> jobs;
    for (const auto& id : chosen) {
      state_.mark_in_progress(id);
      if (auto err = alloc.errors.find(id); err != alloc.errors.end()) {
        state_.mark_failed(id, err->second);
        log_.append(EventKind::kFailed, state_.revision(), id, std::nullopt, err->second);
        continue;
      }
      Job job;
      job.token = ++next_token_;
      job.id = id;
      job.instance = alloc.assigned.at(id);
      job.attempt = attempts_[id]++;
      job.record = state_.at(id);
      job.upstream = collect_upstream(state_, id);
      log_.append(EventKind::kDispatched, state_.revision(), id, job.instance.label(),
                  "wave " + std::to_string(wave_) + ", attempt " + std::to_string(job.attempt));
      labels_[job.token] = job.instance.label();
      inflight_.emplace(job.token, job);
      jobs.push_back(std::move(job));
    }
    return jobs;
  }

  void launch(Job job) {
    threads_.emplace_back([this, job = std::move(job)] {
      Completion c;
      c.token = job.token;
      c.id = job.id;
      try {
        auto output =
            execute_subtask(agents_, job.instance, task_.requirement, job.id, job.record, job.upstream);
        c.ok = true;
        if (options_.injector && options_.injector->should_mask(job.id, job.attempt)) {
          c.masked = true;
          output = options_.injector->sentinel;
        }
        c.output = std::move(output);
        if (cfg_.verify_completions) {
          SubtaskRecord provisional = job.record;
          provisional.status = SubtaskStatus::kCompleted;
          provisional.data = c.output;
          c.verdict = verify_completion(planner_, task_, job.id, provisional, pcfg_);
        }
      } catch (const std::exception& e) {
        c.ok = false;
        c.error = e.what();
      }
      mailbox_.push(std::move(c));
    });
  }

  void launch_update() {
    begin_round();
    WorkflowState snapshot = state_;
    threads_.emplace_back([this, snapshot = std::move(snapshot)] {
      UpdateResult r;
      try {
        r.decision = propose_update(planner_, task_, snapshot, pcfg_);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      mailbox_.push(std::move(r));
    });
  }

  void apply(const Completion& c) {
    const auto rev = state_.revision();
    const std::string agent = agent_label(c.token, c.id);
    if (!c.ok) {
      state_.mark_failed(c.id, c.error);
      log_.append(EventKind::kFailed, rev, c.id, agent, c.error);
      return;
    }
    if (c.masked)
      log_.append(EventKind::kMasked, rev, c.id, agent, "output replaced by the sentinel");
    if (c.verdict && !c.verdict->pass) {
      log_.append(EventKind::kVerifyFailed, rev, c.id, agent, c.verdict->rationale);
      state_.mark_failed(c.id, "verification failed: " + c.verdict->rationale);
      log_.append(EventKind::kFailed, rev, c.id, agent, "verification failed");
      return;
    }
    if (c.verdict) log_.append(EventKind::kVerified, rev, c.id, agent, c.verdict->rationale);
    state_.mark_completed(c.id, c.output);
    log_.append(EventKind::kCompleted, rev, c.id, agent, {});
  }

  std::string agent_label(std::uint64_t token, const SubtaskId&) const {
    auto it = labels_.find(token);
    return it == labels_.end() ? std::string{} : it->second;
  }

  bool budget_left() const { return report_.refinement_rounds_used < cfg_.max_refinement_rounds; }

  void begin_round() {
    ++report_.refinement_rounds_used;
    if (state_.count(SubtaskStatus::kFailed) > 0) ++report_.repair_rounds;
  }

  void note_budget_exhausted() {
    if (budget_noted_) return;
    budget_noted_ = true;
    log_.append(EventKind::kBudgetExhausted, state_.revision(), std::nullopt, std::nullopt,
                cfg_.max_refinement_rounds == 0
                    ? "workflow updates disabled"
                    : "refinement budget of " + std::to_string(cfg_.max_refinement_rounds) +
                          " round(s) used up");
  }

  // Synchronous refinement round; false when the budget is spent.
  bool update_now() {
    if (!budget_left()) {
      note_budget_exhausted();
      return false;
    }
    begin_round();
    try {
      apply_decision(propose_update(planner_, task_, state_, pcfg_));
    } catch (const std::exception& e) {
      log_.append(EventKind::kNoChange, state_.revision(), std::nullopt, std::nullopt,
                  std::string("update failed: ") + e.what());
    }
    return true;
  }

  MergeOutcome apply_decision(const UpdateDecision& decision) {
    const auto rev = state_.revision();
    if (!decision.changes()) {
      std::string why = decision.forced_repair && decision.successors == 0
                            ? "no usable repair proposed"
                            : "planner proposed no change";
      log_.append(EventKind::kNoChange, rev, std::nullopt, std::nullopt,
                  why + " (" + std::to_string(decision.requests) + " request(s))");
      return {};
    }
    const auto& update = std::get<StructuralUpdate>(decision.response);
    std::string detail = std::to_string(decision.successors) + " of " +
                         std::to_string(decision.requests) + " proposal(s) usable";
    if (decision.forced_repair) detail += ", repair forced";
    if (decision.selection) {
      const auto& winner = decision.selection->candidates[decision.selection->winner];
      if (winner.metrics)
        detail += ", selected P_avg=" + fmt_metric(winner.metrics->parallelism_avg) +
                  " C_dependency=" + fmt_metric(winner.metrics->dependency_complexity);
    }
    log_.append(EventKind::kUpdateProposed, rev, std::nullopt, std::nullopt, detail);
    auto merged = state_.merge_update(update, &log_);
    if (merged.accepted && merged.changed)
      log_.append(EventKind::kUpdateMerged, state_.revision(), std::nullopt, std::nullopt,
                  "added " + join_ids(merged.added) + " removed " + join_ids(merged.removed) +
                      " reset " + join_ids(merged.reset));
    return merged;
  }

  void discard_stale(const MergeOutcome& merged) {
    std::set<SubtaskId> gone(merged.removed.begin(), merged.removed.end());
    gone.insert(merged.reset.begin(), merged.reset.end());
    std::erase_if(inflight_, [&](const auto& kv) { return gone.count(kv.second.id) > 0; });
  }

  Outcome stuck_outcome() {
    if (state_.count(SubtaskStatus::kFailed) == 0)
      report_.diagnosis = "no subtask is ready and none has failed";
    else
      report_.diagnosis = std::to_string(state_.count(SubtaskStatus::kFailed)) +
                          " subtask(s) failed; " +
                          std::to_string(state_.size() - state_.count(SubtaskStatus::kCompleted)) +
                          " not completed";
    return cfg_.max_refinement_rounds == 0 ? Outcome::kFailure : Outcome::kBudgetExhausted;
  }

  const TaskSpec& task_;
  Planner& planner_;
  AgentBackend& agents_;
  const PlannerConfig& pcfg_;
  const ExecutorConfig& cfg_;
  const RunOptions& options_;
  std::map<std::string, std::string> personas_;
  RunReport& report_;
  WorkflowState& state_;
  RunLog& log_;

  Mailbox mailbox_;
  std::vector<std::thread> threads_;
  std::map<std::uint64_t, Job> inflight_;
  std::map<std::uint64_t, std::string> labels_;
  std::map<SubtaskId, std::size_t> attempts_;
  std::uint64_t next_token_ = 0;
  std::size_t wave_ = 0;
  bool budget_noted_ = false;
};

RunReport execute(const TaskSpec& task, WorkflowState initial, Planner& planner,
                  AgentBackend& agents, const PlannerConfig& pcfg, const ExecutorConfig& cfg,
                  const RunOptions& options, std::map<std::string, std::string> personas,
                  RunReport report, std::chrono::steady_clock::time_point started) {
  report.final_state = std::move(initial);
  {
    Coordinator coordinator(task, planner, agents, pcfg, cfg, options, std::move(personas),
                            report);
    report.outcome = coordinator.run();
  }
  report.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  if (options.usage_probe) report.token_usage = options.usage_probe();
  report.log.append(EventKind::kDone, report.final_state.revision(), std::nullopt, std::nullopt,
                    std::string("outcome ") + outcome_token(report.outcome) + ", " +
                        std::to_string(report.refinement_rounds_used) + " refinement round(s)");
  return report;
}

}  // namespace

RunReport run_workflow(const TaskSpec& task, WorkflowState initial, Planner& planner,
                       AgentBackend& agents, const PlannerConfig& planner_config,
                       const ExecutorConfig& config, const RunOptions& options) {
  config.validate();
  planner_config.validate();
  if (options.injector) options.injector->validate();
  return execute(task, std::move(initial), planner, agents, planner_config, config, options, {},
                 RunReport{}, std::chrono::steady_clock::now());
}

RunReport run(const TaskSpec& task, Planner& planner, AgentBackend& agents,
              const PlannerConfig& planner_config, const ExecutorConfig& config,
              const RunOptions& options) {
  config.validate();
  planner_config.validate();
  if (options.injector) options.injector->validate();
  const auto started = std::chrono::steady_clock::now();
  RunReport report;

  InitialPlan plan;
  try {
    plan = plan_initial(planner, task, planner_config);
  } catch (const Error& e) {
    report.planning_failed = true;
    report.outcome = Outcome::kFailure;
    report.diagnosis = e.what();
    report.log.append(EventKind::kPlanned, 0, std::nullopt, std::nullopt,
                      std::string("planning failed: ") + e.what());
    report.log.append(EventKind::kDone, 0, std::nullopt, std::nullopt, "outcome failure");
    report.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    if (options.usage_probe) report.token_usage = options.usage_probe();
    return report;
  }

  std::size_t usable = 0;
  for (const auto& c : plan.candidates) usable += c.has_value();
  json planned = {{"candidates", plan.candidates.size()}, {"usable", usable}};
  if (!options.config_echo.empty()) {
    auto echo = json::parse(options.config_echo, nullptr, false);
    planned["config"] = echo.is_discarded() ? json(options.config_echo) : echo;
  }
  report.log.append(EventKind::kPlanned, 0, std::nullopt, std::nullopt, planned.dump());

  const auto& winner = plan.selection.candidates[plan.selection.winner];
  report.log.append(EventKind::kSelected, 0, std::nullopt, std::nullopt,
                    "candidate " + std::to_string(plan.selection.winner) + ": P_avg=" +
                        fmt_metric(winner.metrics->parallelism_avg) + " C_dependency=" +
                        fmt_metric(winner.metrics->dependency_complexity) + " T=" +
                        std::to_string(winner.metrics->level_count));
  report.selection = plan.selection;

  std::map<std::string, std::string> personas;
  for (const auto& v : plan.selected.vertices())
    if (!v.agent.persona.empty()) personas.emplace(v.agent.name, v.agent.persona);

  auto initial = WorkflowState::from_graph(plan.selected, task.requirement);
  return execute(task, std::move(initial), planner, agents, planner_config, config, options,
                 std::move(personas), std::move(report), started);
}

}  // namespace flow

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

// flow: plan, run, inspect and simulate AOV workflows.
//
// Exit codes: 0 success, 2 input or planning error, 3 execution failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_config.hpp"
#include "flow/flow.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitExecution = 3;

// Thrown for anything that maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ConfigPtr = std::unique_ptr<flow_config, Deleter<flow_config, flow_config_destroy>>;
using WorkflowPtr = std::unique_ptr<flow_workflow, Deleter<flow_workflow, flow_workflow_destroy>>;
using PlanPtr =
    std::unique_ptr<flow_plan_result, Deleter<flow_plan_result, flow_plan_result_destroy>>;
using RunPtr = std::unique_ptr<flow_run_report, Deleter<flow_run_report, flow_run_report_destroy>>;
using SimPtr = std::unique_ptr<flow_sim_report, Deleter<flow_sim_report, flow_sim_report_destroy>>;

void check(flow_status status, const std::string& what) {
  if (status != FLOW_OK)
    throw InputError(what + ": " + flow_status_name(status) + ": " + flow_last_error());
}

std::string take(char* s) {
  std::string out(s ? s : "");
  flow_string_free(s);
  return out;
}

template <class F>
std::string fetch(F&& f, const std::string& what) {
  char* s = nullptr;
  check(f(&s), what);
  return take(s);
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot read ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw InputError("cannot write '" + path.string() + "'");
}

std::string timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

struct Cli {
  std::string config_path;
  flow::cli::Settings flags;

  // Registers a value option that, when given, sets `key`.
  void opt(CLI::App* app, const std::string& name, const std::string& key,
           const std::string& help) {
    app->add_option_function<std::string>(
        name, [this, key](const std::string& v) { flags[key] = v; }, help);
  }
  void flag(CLI::App* app, const std::string& name, const std::string& key,
            const std::string& value, const std::string& help) {
    app->add_flag_callback(name, [this, key, value] { flags[key] = value; }, help);
  }

  ConfigPtr config() const {
    flow::cli::Settings file;
    if (!config_path.empty()) {
      try {
        file = flow::cli::load_config_file(config_path);
      } catch (const std::exception& e) {
        throw InputError(e.what());
      }
    } else if (fs::exists("flow.toml")) {
      try {
        file = flow::cli::load_config_file("flow.toml");
      } catch (const std::exception& e) {
        throw InputError(e.what());
      }
    }
    auto merged = flow::cli::merge_settings(file, flow::cli::env_settings(), flags);
    flow_config* raw = nullptr;
    check(flow_config_create(&raw), "config");
    ConfigPtr cfg(raw);
    for (const auto& [k, v] : merged)
      check(flow_config_set(cfg.get(), k.c_str(), v.c_str()), "setting '" + k + "'");
    return cfg;
  }

  fs::path out_dir(const flow_config* cfg) const {
    char* raw = nullptr;
    fs::path dir = flow_config_get(cfg, "out", &raw) == FLOW_OK ? fs::path(take(raw))
                                                                 : fs::path("runs") / timestamp();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
  }
};

void add_planning_flags(Cli& cli, CLI::App* app) {
  cli.opt(app, "--planner", "planner", "mock or llm");
  cli.opt(app, "--k", "k", "number of candidate workflows");
  cli.opt(app, "--temperature", "temperature", "sampling temperature for candidates");
  cli.opt(app, "--max-parse-retries", "max_parse_retries", "re-asks per unusable response");
  cli.opt(app, "--fixtures", "fixtures", "candidate workflows for the mock planner");
  cli.opt(app, "--prompt-dir", "prompt_dir", "directory of prompt template overrides");
  cli.opt(app, "--api-base", "api_base", "chat-completions base URL");
  cli.opt(app, "--model", "model", "model name");
  cli.opt(app, "--timeout-s", "timeout_s", "request timeout in seconds");
  cli.opt(app, "--seed", "seed", "seed for every stochastic choice");
  cli.opt(app, "--out", "out", "output directory (default ./runs/<timestamp>/)");
}

int cmd_plan(const Cli& cli, const std::string& task_file) {
  auto task = read_file(task_file, "task file");
  auto cfg = cli.config();
  flow_plan_result* raw = nullptr;
  auto status = flow_plan(cfg.get(), task.c_str(), &raw);
  if (status != FLOW_OK) {
    std::cerr << "planning failed: " << flow_last_error() << "\n";
    return kExitInput;
  }
  PlanPtr plan(raw);
  auto dir = cli.out_dir(cfg.get());
  write_file(dir / "workflow.json",
             fetch([&](char** s) { return flow_plan_workflow_json(plan.get(), s); }, "workflow"));
  write_file(dir / "selection.json",
             fetch([&](char** s) { return flow_plan_selection_json(plan.get(), s); }, "selection"));
  std::cout << "selected candidate " << flow_plan_winner(plan.get()) << "; wrote "
            << (dir / "workflow.json").string() << " and " << (dir / "selection.json").string()
            << "\n";
  return kExitOk;
}

int cmd_run(const Cli& cli, const std::string& task_file, const std::string& workflow_file) {
  auto task = read_file(task_file, "task file");
  auto cfg = cli.config();
  flow_run_report* raw = nullptr;
  if (!workflow_file.empty()) {
    auto text = read_file(workflow_file, "workflow file");
    flow_workflow* wf_raw = nullptr;
    check(flow_workflow_parse(text.data(), text.size(), &wf_raw), "workflow '" + workflow_file + "'");
    WorkflowPtr wf(wf_raw);
    check(flow_run_workflow(cfg.get(), wf.get(), task.c_str(), &raw), "run");
  } else {
    check(flow_run(cfg.get(), task.c_str(), &raw), "run");
  }
  RunPtr report(raw);
  auto dir = cli.out_dir(cfg.get());
  auto final_json = fetch([&](char** s) { return flow_run_final_json(report.get(), s); }, "final");
  write_file(dir / "run.jsonl",
             fetch([&](char** s) { return flow_run_log_jsonl(report.get(), s); }, "log"));
  write_file(dir / "final.json", final_json);
  write_file(dir / "report.json",
             fetch([&](char** s) { return flow_run_report_json(report.get(), s); }, "report"));

  const auto outcome = flow_run_outcome(report.get());
  if (flow_run_planning_failed(report.get())) {
    std::cerr << "planning failed; see " << (dir / "report.json").string() << "\n";
    return kExitInput;
  }
  std::size_t total = 0, completed = 0;
  auto doc = nlohmann::json::parse(final_json, nullptr, false);
  if (doc.is_object() && doc.contains("tasks"))
    for (const auto& [_, t] : doc["tasks"].items()) {
      ++total;
      completed += t.value("status", "") == "completed";
    }
  const char* name = outcome == FLOW_OUTCOME_SUCCESS ? "success"
                     : outcome == FLOW_OUTCOME_BUDGET_EXHAUSTED ? "budget_exhausted"
                                                                : "failure";
  std::cout << "outcome " << name << ": " << completed << "/" << total
            << " subtasks completed, " << flow_run_refinement_rounds(report.get())
            << " refinement round(s), " << flow_run_repair_rounds(report.get())
            << " repair round(s); artifacts in " << dir.string() << "\n";
  return outcome == FLOW_OUTCOME_SUCCESS ? kExitOk : kExitExecution;
}

int cmd_metrics(const std::string& workflow_file, bool as_json) {
  auto text = read_file(workflow_file, "workflow file");
  flow_workflow* raw = nullptr;
  check(flow_workflow_parse(text.data(), text.size(), &raw), "workflow '" + workflow_file + "'");
  WorkflowPtr wf(raw);
  for (std::size_t i = 0; i < flow_workflow_warning_count(wf.get()); ++i)
    std::cerr << "warning: " << flow_workflow_warning(wf.get(), i) << "\n";
  flow_metrics m{};
  check(flow_workflow_metrics(wf.get(), &m), "metrics");
  auto levels = nlohmann::json::parse(
      fetch([&](char** s) { return flow_workflow_levels_json(wf.get(), s); }, "levels"));
  if (as_json) {
    nlohmann::ordered_json j = {{"P_avg", m.parallelism_avg},
                                {"C_dependency", m.dependency_complexity},
                                {"T", m.level_count},
                                {"mean_degree", m.mean_degree},
                                {"levels", levels}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  char line[160];
  std::snprintf(line, sizeof line, "P_avg=%.4f\nC_dependency=%.4f\nT=%zu\n", m.parallelism_avg,
                m.dependency_complexity, m.level_count);
  std::cout << line;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::cout << "level " << i + 1 << ":";
    for (const auto& id : levels[i]) std::cout << " " << id.get<std::string>();
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const Cli& cli, const std::string& which) {
  auto cfg = cli.config();
  flow_sim_report* raw = nullptr;
  check(which == "theorem1" ? flow_simulate_theorem1(cfg.get(), &raw)
                            : flow_simulate_ablation(cfg.get(), &raw),
        which);
  SimPtr sim(raw);
  auto dir = cli.out_dir(cfg.get());
  auto csv_path = dir / (which + ".csv");
  write_file(csv_path, fetch([&](char** s) { return flow_sim_csv(sim.get(), s); }, "csv"));
  std::cout << fetch([&](char** s) { return flow_sim_summary(sim.get(), s); }, "summary");
  std::cout << "wrote " << csv_path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan, run and analyse AOV multi-agent workflows."};
  app.require_subcommand(1);
  Cli cli;
  app.add_option("--config", cli.config_path, "settings file (default ./flow.toml when present)");

  std::string task_file, workflow_file;
  bool as_json = false;

  auto* plan = app.add_subcommand("plan", "generate candidate workflows and select one");
  plan->add_option("task_file", task_file, "plain-text task requirement")->required();
  add_planning_flags(cli, plan);

  auto* run = app.add_subcommand("run", "plan and execute a task end to end");
  run->add_option("task_file", task_file, "plain-text task requirement")->required();
  run->add_option("--workflow", workflow_file, "execute this snapshot instead of planning");
  add_planning_flags(cli, run);
  cli.opt(run, "--agents", "agents", "stub or llm");
  cli.opt(run, "--strategy", "strategy", "batch_update or concurrent_update");
  cli.opt(run, "--max-concurrent", "max_concurrent", "subtasks in flight at once");
  cli.opt(run, "--max-refinement-rounds", "max_refinement_rounds", "planner update budget");
  cli.opt(run, "--mask", "mask", "comma-separated subtasks whose first output is masked");
  cli.opt(run, "--mask-probability", "mask_probability", "chance of masking any output");
  cli.opt(run, "--sentinel", "sentinel", "replacement text for masked outputs");
  cli.opt(run, "--stub-latency-ms", "stub_latency_ms", "stub agent latency");
  cli.flag(run, "--no-update", "no_update", "true", "disable workflow refinement");
  cli.flag(run, "--no-verify", "verify", "false", "skip completion verification");

  auto* metrics = app.add_subcommand("metrics", "print parallelism and dependency metrics");
  metrics->add_option("workflow_file", workflow_file, "workflow snapshot")->required();
  metrics->add_flag("--json", as_json, "machine-readable output");

  auto* simulate = app.add_subcommand("simulate", "reliability experiments");
  simulate->require_subcommand(1);
  auto* theorem1 = simulate->add_subcommand("theorem1", "edge-addition experiment");
  cli.opt(theorem1, "--n", "n", "vertices per DAG");
  cli.opt(theorem1, "--p-f", "p_f", "per-subtask failure probability in (0, 1)");
  cli.opt(theorem1, "--pairs", "pairs", "number of (A, B) pairs");
  cli.opt(theorem1, "--trials", "trials", "Monte Carlo trials per graph (0 to skip)");
  cli.opt(theorem1, "--edge-prob", "edge_prob", "forward edge probability");
  cli.opt(theorem1, "--seed", "seed", "base seed");
  cli.opt(theorem1, "--out", "out", "output directory");
  auto* ablation = simulate->add_subcommand("ablation", "masking ablation on workflow 2");
  cli.opt(ablation, "--seeds", "seeds", "number of seeds");
  cli.opt(ablation, "--seed", "seed", "first seed");
  cli.opt(ablation, "--max-refinement-rounds", "max_refinement_rounds", "budget of the refinement arm");
  cli.opt(ablation, "--strategy", "strategy", "batch_update or concurrent_update");
  cli.opt(ablation, "--out", "out", "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*plan) return cmd_plan(cli, task_file);
    if (*run) return cmd_run(cli, task_file, workflow_file);
    if (*metrics) return cmd_metrics(workflow_file, as_json);
    if (*theorem1) return cmd_simulate(cli, "theorem1");
    if (*ablation) return cmd_simulate(cli, "ablation");
  } catch (const InputError& e) {
    std::cerr << "flow: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "flow: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

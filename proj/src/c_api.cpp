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

#include "flow/flow.h"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "ablation.hpp"
#include "engine_options.hpp"
#include "errors.hpp"
#include "executor.hpp"
#include "planner.hpp"
#include "reliability.hpp"
#include "workflow_state.hpp"

struct flow_config {
  flow::EngineOptions options;
};

struct flow_workflow {
  flow::WorkflowState state;
  std::vector<std::string> warnings;
};

struct flow_plan_result {
  flow::InitialPlan plan;
  std::string goal;
};

struct flow_run_report {
  flow::RunReport report;
};

struct flow_sim_report {
  std::string csv;
  std::string summary;
  std::size_t violations = 0;
};

namespace {

thread_local std::string g_last_error;

flow_status to_status(flow::ErrorCode code) {
  using flow::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return FLOW_ERR_INVALID_ARGUMENT;
    case ErrorCode::kParse: return FLOW_ERR_PARSE;
    case ErrorCode::kValidation: return FLOW_ERR_VALIDATION;
    case ErrorCode::kStateTransition: return FLOW_ERR_STATE;
    case ErrorCode::kMissingKey: return FLOW_ERR_MISSING_KEY;
    case ErrorCode::kPlanning: return FLOW_ERR_PLANNING;
    case ErrorCode::kTransport: return FLOW_ERR_TRANSPORT;
    case ErrorCode::kProtocol: return FLOW_ERR_PROTOCOL;
    case ErrorCode::kAuth: return FLOW_ERR_AUTH;
    case ErrorCode::kIo: return FLOW_ERR_IO;
  }
  return FLOW_ERR_INTERNAL;
}

template <class F>
flow_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return FLOW_OK;
  } catch (const flow::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FLOW_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FLOW_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw flow::InvalidArgument(std::string(what) + " must not be NULL");
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

flow_status emit(char** out, const std::function<std::string()>& make) {
  return guarded([&] {
    require(out, "out");
    *out = copy_out(make());
  });
}

}  // namespace

extern "C" {

const char* flow_version(void) { return "0.1.0"; }

const char* flow_last_error(void) { return g_last_error.c_str(); }

const char* flow_status_name(flow_status status) {
  switch (status) {
    case FLOW_OK: return "ok";
    case FLOW_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case FLOW_ERR_PARSE: return "parse_error";
    case FLOW_ERR_VALIDATION: return "validation_error";
    case FLOW_ERR_STATE: return "state_transition_error";
    case FLOW_ERR_MISSING_KEY: return "missing_key";
    case FLOW_ERR_PLANNING: return "planning_error";
    case FLOW_ERR_TRANSPORT: return "transport_error";
    case FLOW_ERR_PROTOCOL: return "protocol_error";
    case FLOW_ERR_AUTH: return "auth_error";
    case FLOW_ERR_IO: return "io_error";
    case FLOW_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

void flow_string_free(char* s) { std::free(s); }

flow_status flow_config_create(flow_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new flow_config();
  });
}

void flow_config_destroy(flow_config* config) { delete config; }

flow_status flow_config_set(flow_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->options.set(key, value);
  });
}

flow_status flow_config_get(const flow_config* config, const char* key, char** out) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(out, "out");
    auto v = config->options.get(key);
    if (!v) throw flow::MissingKeyError(std::string("option '") + key + "' is not set");
    *out = copy_out(*v);
  });
}

flow_status flow_config_dump(const flow_config* config, char** out) {
  return emit(out, [&] {
    require(config, "config");
    return config->options.dump();
  });
}

flow_status flow_workflow_parse(const char* json, size_t len, flow_workflow** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    auto loaded = flow::WorkflowState::from_json(std::string_view(json, len));
    *out = new flow_workflow{std::move(loaded.state), std::move(loaded.warnings)};
  });
}

void flow_workflow_destroy(flow_workflow* workflow) { delete workflow; }

size_t flow_workflow_size(const flow_workflow* workflow) {
  return workflow ? workflow->state.size() : 0;
}

size_t flow_workflow_warning_count(const flow_workflow* workflow) {
  return workflow ? workflow->warnings.size() : 0;
}

const char* flow_workflow_warning(const flow_workflow* workflow, size_t index) {
  if (!workflow || index >= workflow->warnings.size()) return nullptr;
  return workflow->warnings[index].c_str();
}

flow_status flow_workflow_to_json(const flow_workflow* workflow, char** out) {
  return emit(out, [&] {
    require(workflow, "workflow");
    return workflow->state.to_json();
  });
}

flow_status flow_workflow_metrics(const flow_workflow* workflow, flow_metrics* out) {
  return guarded([&] {
    require(workflow, "workflow");
    require(out, "out");
    auto m = flow::compute_metrics(workflow->state.to_graph());
    *out = flow_metrics{m.parallelism_avg, m.dependency_complexity, m.level_count, m.mean_degree};
  });
}

flow_status flow_workflow_levels_json(const flow_workflow* workflow, char** out) {
  return emit(out, [&] {
    require(workflow, "workflow");
    auto plan = flow::topological_levels(workflow->state.to_graph());
    return nlohmann::json(plan.levels).dump();
  });
}

flow_status flow_plan(const flow_config* config, const char* task, flow_plan_result** out) {
  return guarded([&] {
    require(config, "config");
    require(task, "task");
    require(out, "out");
    auto engine = flow::build_engine(config->options);
    auto plan = flow::plan_initial(*engine.planner, flow::TaskSpec{task, {}},
                                   config->options.planner_config());
    *out = new flow_plan_result{std::move(plan), task};
  });
}

void flow_plan_result_destroy(flow_plan_result* plan) { delete plan; }

size_t flow_plan_winner(const flow_plan_result* plan) {
  return plan ? plan->plan.selection.winner : 0;
}

flow_status flow_plan_workflow_json(const flow_plan_result* plan, char** out) {
  return emit(out, [&] {
    require(plan, "plan");
    return flow::WorkflowState::from_graph(plan->plan.selected, plan->goal).to_json();
  });
}

flow_status flow_plan_selection_json(const flow_plan_result* plan, char** out) {
  return emit(out, [&] {
    require(plan, "plan");
    auto j = flow::selection_to_json(plan->plan.selection);
    for (const auto& w : plan->plan.warnings) j["warnings"].push_back(w);
    return j.dump(2) + "\n";
  });
}

flow_status flow_run(const flow_config* config, const char* task, flow_run_report** out) {
  return guarded([&] {
    require(config, "config");
    require(task, "task");
    require(out, "out");
    const auto& opts = config->options;
    auto engine = flow::build_engine(opts);
    auto run_opts = flow::run_options(opts);
    run_opts.usage_probe = engine.usage_probe;
    auto report = flow::run(flow::TaskSpec{task, {}}, *engine.planner, *engine.agents,
                            opts.planner_config(), opts.executor_config(), run_opts);
    *out = new flow_run_report{std::move(report)};
  });
}

flow_status flow_run_workflow(const flow_config* config, const flow_workflow* workflow,
                              const char* task, flow_run_report** out) {
  return guarded([&] {
    require(config, "config");
    require(workflow, "workflow");
    require(out, "out");
    const auto& opts = config->options;
    auto engine = flow::build_engine(opts);
    auto run_opts = flow::run_options(opts);
    run_opts.usage_probe = engine.usage_probe;
    std::string goal = task ? std::string(task) : workflow->state.goal();
    auto report = flow::run_workflow(flow::TaskSpec{goal, {}}, workflow->state, *engine.planner,
                                     *engine.agents, opts.planner_config(),
                                     opts.executor_config(), run_opts);
    *out = new flow_run_report{std::move(report)};
  });
}

void flow_run_report_destroy(flow_run_report* report) { delete report; }

flow_outcome flow_run_outcome(const flow_run_report* report) {
  if (!report) return FLOW_OUTCOME_FAILURE;
  switch (report->report.outcome) {
    case flow::Outcome::kSuccess: return FLOW_OUTCOME_SUCCESS;
    case flow::Outcome::kBudgetExhausted: return FLOW_OUTCOME_BUDGET_EXHAUSTED;
    case flow::Outcome::kFailure: break;
  }
  return FLOW_OUTCOME_FAILURE;
}

int flow_run_planning_failed(const flow_run_report* report) {
  return report && report->report.planning_failed ? 1 : 0;
}

int flow_run_refinement_rounds(const flow_run_report* report) {
  return report ? report->report.refinement_rounds_used : 0;
}

int flow_run_repair_rounds(const flow_run_report* report) {
  return report ? report->report.repair_rounds : 0;
}

flow_status flow_run_log_jsonl(const flow_run_report* report, char** out) {
  return emit(out, [&] {
    require(report, "report");
    return report->report.log.to_jsonl();
  });
}

flow_status flow_run_final_json(const flow_run_report* report, char** out) {
  return emit(out, [&] {
    require(report, "report");
    return report->report.final_state.to_json();
  });
}

flow_status flow_run_report_json(const flow_run_report* report, char** out) {
  return emit(out, [&] {
    require(report, "report");
    return report->report.to_json().dump(2) + "\n";
  });
}

flow_status flow_simulate_theorem1(const flow_config* config, flow_sim_report** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    const auto& o = config->options;
    auto n = o.get_int("n", 10);
    auto pairs = o.get_int("pairs", 200);
    auto trials = o.get_int("trials", static_cast<long long>(flow::reliability::kDefaultTrials));
    if (n < 1) throw flow::InvalidArgument("n must be >= 1");
    if (pairs < 1) throw flow::InvalidArgument("pairs must be >= 1");
    if (trials < 0) throw flow::InvalidArgument("trials must be >= 0");
    flow::reliability::DagSpec spec{static_cast<std::size_t>(n), o.get_double("edge_prob", 0.3),
                                    o.seed()};
    flow::reliability::FailureModel model{o.get_double("p_f", 0.3)};
    auto report = flow::reliability::theorem1_experiment(
        spec, model, static_cast<std::size_t>(pairs), static_cast<std::size_t>(trials));
    *out = new flow_sim_report{report.to_csv(), report.summary(), report.recursion_violations()};
  });
}

flow_status flow_simulate_ablation(const flow_config* config, flow_sim_report** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    const auto& o = config->options;
    flow::AblationConfig cfg;
    auto seeds = o.get_int("seeds", static_cast<long long>(cfg.seeds));
    if (seeds < 1) throw flow::InvalidArgument("seeds must be >= 1");
    cfg.seeds = static_cast<std::size_t>(seeds);
    cfg.base_seed = o.seed();
    cfg.max_refinement_rounds =
        static_cast<int>(o.get_int("max_refinement_rounds", cfg.max_refinement_rounds));
    cfg.strategy = o.executor_config().strategy;
    cfg.sentinel = o.get_string("sentinel", cfg.sentinel);
    auto report = flow::run_ablation(cfg);
    std::size_t violations = 0;
    for (const auto& r : report.rows)
      violations += (r.with_update != flow::Outcome::kSuccess) ||
                    (r.without_update == flow::Outcome::kSuccess);
    *out = new flow_sim_report{report.to_csv(), report.summary(), violations};
  });
}

void flow_sim_report_destroy(flow_sim_report* report) { delete report; }

flow_status flow_sim_csv(const flow_sim_report* report, char** out) {
  return emit(out, [&] {
    require(report, "report");
    return report->csv;
  });
}

flow_status flow_sim_summary(const flow_sim_report* report, char** out) {
  return emit(out, [&] {
    require(report, "report");
    return report->summary;
  });
}

size_t flow_sim_violations(const flow_sim_report* report) {
  return report ? report->violations : 0;
}

}  // extern "C"

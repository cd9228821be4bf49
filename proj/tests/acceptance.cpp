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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when
// any criterion fails or overruns its time limit.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ablation.hpp"
#include "aov_graph.hpp"
#include "errors.hpp"
#include "executor.hpp"
#include "fixtures.hpp"
#include "llm_client.hpp"
#include "log.hpp"
#include "mock_planner.hpp"
#include "reliability.hpp"
#include "run_audit.hpp"
#include "stub_server.hpp"
#include "test_support.hpp"
#include "workflow_state.hpp"

using namespace flow;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
namespace rel = flow::reliability;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Result metric_oracle() {
  Result v;
  struct Expect {
    const char* name;
    AovGraph graph;
    const char* file;
    double p, c;
    std::size_t t;
  };
  const Expect cases[] = {
      {"W1", fixtures::workflow1(), "w1.json", 4.0 / 3.0, 0.5, 3},
      {"W2", fixtures::workflow2(), "w2.json", 4.0 / 3.0, std::sqrt(0.75), 3},
      {"W3", fixtures::workflow3(), "w3.json", 1.0, 0.5, 4},
  };
  for (const auto& e : cases) {
    const auto from_file = WorkflowState::from_json(
                         read_file(fs::path(FLOW_FIXTURE_DIR) / "workflows" / e.file))
                         .state.to_graph();
    for (const AovGraph* g : {&e.graph, &from_file}) {
      auto m = compute_metrics(*g);
      v.require(near(m.parallelism_avg, e.p, 1e-9), std::string(e.name) + " P_avg");
      v.require(near(m.dependency_complexity, e.c, 1e-9), std::string(e.name) + " C_dependency");
      v.require(m.level_count == e.t, std::string(e.name) + " T");
    }
  }
  v.detail = "W1, W2, W3 from code and fixture files";
  return v;
}

Result structural_properties() {
  Result v;
  std::size_t brute = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t n = 1 + seed % 12;
    const double p = 0.1 + 0.1 * static_cast<double>(seed % 7);
    auto g = flow::testing::shuffled_dag(n, p, seed);
    auto plan = topological_levels(g);
    auto m = compute_metrics(g);
    const auto tag = "seed " + std::to_string(seed);
    v.require(m.parallelism_avg * static_cast<double>(m.level_count) == static_cast<double>(n),
              tag + ": P_avg*T != |V|");
    std::size_t covered = 0;
    for (const auto& level : plan.levels) covered += level.size();
    v.require(covered == n, tag + ": levels do not partition V");
    for (const auto& e : g.edges())
      v.require(plan.level_of(e.from) < plan.level_of(e.to), tag + ": backward edge");
    if (n <= 8) {
      ++brute;
      v.require(plan.level_count() == flow::testing::brute_force_longest_path(g),
                tag + ": level count vs brute force");
    }
  }
  v.detail = "1000 DAGs, " + std::to_string(brute) + " brute-forced";
  return v;
}

Result selection_rule() {
  Result v;
  using flow::testing::make_graph;
  // Pool with ties on P_avg (W1/W2), exact duplicates (W1/W1b) and extremes.
  std::vector<AovGraph> pool = {
      fixtures::workflow1(),
      fixtures::workflow2(),
      fixtures::workflow3(),
      make_graph({"x", "y", "z"}, {}),
      make_graph({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}}),
      make_graph({"P", "Q", "R", "S"}, {{"P", "R"}, {"P", "S"}, {"Q", "R"}, {"Q", "S"}, {"R", "S"}}),
  };
  struct Known {
    double p, c;
  };
  std::vector<Known> known;
  for (const auto& g : pool)
    known.push_back({static_cast<double>(g.size()) /
                         static_cast<double>(flow::testing::brute_force_longest_path(g)),
                     flow::testing::oracle_degree_std(g)});
  std::size_t sets = 0;
  const std::size_t m = pool.size();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t d = 0; d < m; ++d) {
          const std::size_t pick[4] = {a, b, c, d};
          std::vector<AovGraph> cands;
          for (auto i : pick) cands.push_back(pool[i]);
          std::size_t best = 0;
          for (std::size_t i = 1; i < 4; ++i) {
            const auto& x = known[pick[i]];
            const auto& y = known[pick[best]];
            if (x.p > y.p + 1e-9 || (std::fabs(x.p - y.p) <= 1e-9 && x.c < y.c - 1e-9)) best = i;
          }
          ++sets;
          v.require(select_candidate(cands).winner == best,
                    "set " + std::to_string(a) + std::to_string(b) + std::to_string(c) +
                        std::to_string(d));
        }
  v.detail = std::to_string(sets) + " ordered 4-candidate sets";
  return v;
}

Result theorem1_recursion() {
  Result v;
  std::size_t rows = 0, sinks = 0;
  double worst_node = 0.0, worst_total = 0.0;
  for (double p_f : {0.1, 0.3, 0.5}) {
    for (std::size_t n : {4u, 8u, 12u}) {
      rel::DagSpec spec;
      spec.n = n;
      spec.seed = 1000 * n + static_cast<std::uint64_t>(p_f * 10);
      auto report = rel::theorem1_experiment(spec, {p_f}, 200, 0);
      v.require(report.recursion_violations() == 0,
                "p_f " + fmt("%g", p_f) + " n " + std::to_string(n) + ": E_A <= E_B");
      for (const auto& r : report.rows) {
        ++rows;
        v.require(r.delta > 0.0, "pair " + std::to_string(r.pair) + ": no strict drop");
        const double node_err = std::fabs(r.node_delta - r.predicted_delta);
        worst_node = std::max(worst_node, node_err);
        v.require(node_err <= 1e-12, "pair " + std::to_string(r.pair) + ": node identity");
        if (r.v_star_is_sink) {
          ++sinks;
          const double err = std::fabs(r.delta - r.predicted_delta);
          worst_total = std::max(worst_total, err);
          v.require(err <= 1e-12, "pair " + std::to_string(r.pair) + ": total identity");
        } else {
          v.require(r.delta >= r.predicted_delta - 1e-12,
                    "pair " + std::to_string(r.pair) + ": below the identity bound");
        }
      }
    }
  }
  v.detail = std::to_string(rows) + " pairs, all strict; identity err " + fmt("%.1e", worst_node) +
             " (node), " + fmt("%.1e", worst_total) + " (total, " + std::to_string(sinks) +
             " sink pairs)";
  return v;
}

Result oracle_equivalence() {
  Result v;
  std::size_t forests = 0, mc_runs = 0;
  double worst = 0.0, worst_z = 0.0;
  for (double p_f : {0.1, 0.3, 0.5})
    for (std::size_t n = 1; n <= 12; ++n)
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto g = rel::random_out_forest(n, seed * 31 + n);
        auto rec = rel::expected_completed(g, {p_f}, rel::Method::kRecursion).expected_completed;
        auto enu = rel::expected_completed(g, {p_f}, rel::Method::kEnumeration).expected_completed;
        worst = std::max(worst, std::fabs(rec - enu));
        v.require(std::fabs(rec - enu) <= 1e-12, "forest n " + std::to_string(n));
        ++forests;
      }

  using flow::testing::make_graph;
  auto diamond = make_graph({"a", "b", "c", "d"}, {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
  const double diamond_exact =
      rel::expected_completed(diamond, {0.5}, rel::Method::kEnumeration).expected_completed;
  v.require(near(diamond_exact, 1.0625, 1e-12), "diamond enumeration != 1.0625");

  std::vector<std::pair<AovGraph, double>> family = {
      {diamond, 0.5},
      {fixtures::workflow1(), 0.3},
      {fixtures::workflow2(), 0.3},
      {fixtures::workflow3(), 0.5},
  };
  for (std::size_t n : {3u, 6u, 9u, 12u}) family.push_back({rel::random_out_forest(n, n), 0.3});
  for (const auto& [g, p_f] : family) {
    auto enu = rel::expected_completed(g, {p_f}, rel::Method::kEnumeration).expected_completed;
    auto mc = rel::expected_completed(g, {p_f}, rel::Method::kMonteCarlo, 200000, 17 + mc_runs);
    ++mc_runs;
    const double se = mc.std_error.value_or(0.0);
    const double z = se > 0 ? std::fabs(mc.expected_completed - enu) / se : 0.0;
    worst_z = std::max(worst_z, z);
    v.require(std::fabs(mc.expected_completed - enu) <= 4.0 * se,
              "monte carlo off by " + fmt("%.2f", z) + " SE");
  }
  v.detail = std::to_string(forests) + " forests (max err " + fmt("%.1e", worst) + "), " +
             std::to_string(mc_runs) + " MC fixtures (max " + fmt("%.2f", worst_z) +
             " SE), diamond " + fmt("%.4f", diamond_exact);
  return v;
}

Result executor_safety() {
  Result v;
  std::size_t subtasks = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const std::size_t n = 1 + seed % 12;
    auto g = flow::testing::shuffled_dag(n, 0.15 + 0.05 * static_cast<double>(seed % 6), seed,
                                         1 + seed % 3);
    MockPlanner planner({fixtures::candidate_text(g, "goal")});
    StubBackend agents;
    PlannerConfig pcfg;
    pcfg.k = 1;
    ExecutorConfig cfg;
    cfg.strategy = seed % 2 ? UpdateStrategy::kConcurrentUpdate : UpdateStrategy::kBatchUpdate;
    cfg.max_concurrent = 1 + seed % 8;
    auto r = run({"goal", {}}, planner, agents, pcfg, cfg);
    const auto tag = "seed " + std::to_string(seed);
    v.require(r.outcome == Outcome::kSuccess, tag + ": not successful");
    auto a = flow::testing::audit(r, g);
    v.require(a.order_ok, tag + ": child started before a parent completed");
    v.require(a.dispatched.size() == n, tag + ": not every subtask dispatched");
    for (const auto& [id, count] : a.dispatched)
      v.require(count == 1, tag + ": " + id + " dispatched " + std::to_string(count) + " times");
    subtasks += n;
  }
  v.detail = "500 runs, " + std::to_string(subtasks) + " subtasks, both strategies";
  return v;
}

Result concurrency() {
  Result v;
  auto g = flow::testing::make_graph({"a", "b", "c", "d", "e", "f"}, {});
  auto timed = [&](std::size_t max_concurrent) {
    MockPlanner planner({fixtures::candidate_text(g, "goal")});
    StubBackend agents(200ms);
    PlannerConfig pcfg;
    pcfg.k = 1;
    ExecutorConfig cfg;
    cfg.max_concurrent = max_concurrent;
    auto start = std::chrono::steady_clock::now();
    auto r = run_workflow({"goal", {}}, WorkflowState::from_graph(g, "goal"), planner, agents,
                          pcfg, cfg);
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count();
    v.require(r.outcome == Outcome::kSuccess, "run failed");
    return ms;
  };
  const double parallel = timed(8);
  const double sequential = timed(1);
  v.require(parallel <= 300.0, "parallel wave took " + fmt("%.0f", parallel) + " ms");
  v.require(sequential >= 1200.0, "sequential baseline took " + fmt("%.0f", sequential) + " ms");
  v.detail = "6 x 200 ms wave: " + fmt("%.0f", parallel) + " ms parallel, " +
             fmt("%.0f", sequential) + " ms with one slot";
  return v;
}

int run_cli(const std::vector<std::string>& args) {
  std::string cmd = std::string("'") + FLOW_CLI_PATH + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Result error_handling_ablation() {
  Result v;
  auto root = fs::temp_directory_path() / ("flow_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  auto task = root / "task.txt";
  std::ofstream(task) << "Produce a short reviewed report from an outline and collected references.\n";
  const auto fixture = (fs::path(FLOW_FIXTURE_DIR) / "workflows" / "w2.json").string();
  const auto blocking = fixtures::masked_blocking_choices();
  auto w2 = fixtures::workflow2();

  int with_ok = 0, without_fail = 0, max_repair = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mask = ablation_mask_choice(seed);
    const auto tag = "seed " + std::to_string(seed) + " mask " + mask;
    v.require(!w2.children(mask).empty(), tag + ": masked subtask blocks nothing");
    const std::vector<std::string> common = {"run", task.string(), "--fixtures", fixture,
                                             "--k", "1", "--mask", mask,
                                             "--seed", std::to_string(seed)};
    auto with_dir = root / ("with_" + std::to_string(seed));
    auto args = common;
    args.insert(args.end(), {"--out", with_dir.string()});
    const int code_with = run_cli(args);
    v.require(code_with == 0, tag + ": refinement arm exit " + std::to_string(code_with));
    if (code_with == 0) {
      auto report = nlohmann::json::parse(read_file(with_dir / "report.json"));
      const int repairs = report.at("repair_rounds").get<int>();
      max_repair = std::max(max_repair, repairs);
      v.require(report.at("outcome") == "success", tag + ": outcome not success");
      v.require(repairs >= 1 && repairs <= 2, tag + ": repair rounds " + std::to_string(repairs));
      if (report.at("outcome") == "success" && repairs <= 2) ++with_ok;
    }

    auto without_dir = root / ("without_" + std::to_string(seed));
    args = common;
    args.insert(args.end(), {"--no-update", "--out", without_dir.string()});
    const int code_without = run_cli(args);
    v.require(code_without == 3, tag + ": no-update arm exit " + std::to_string(code_without));
    if (code_without == 3) ++without_fail;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  v.detail = "20 seeds over " + std::to_string(blocking.size()) +
             " blocking choices: with refinement " + std::to_string(with_ok * 5) +
             "% (max " + std::to_string(max_repair) + " repair rounds), without " +
             std::to_string((20 - without_fail) * 5) + "%";
  return v;
}

Result serialization() {
  Result v;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = flow::testing::random_progress(seed);
    auto text = s.to_json();
    auto loaded = WorkflowState::from_json(text);
    v.require(loaded.warnings.empty(), "seed " + std::to_string(seed) + ": warnings");
    v.require(loaded.state == s, "seed " + std::to_string(seed) + ": state differs");
    v.require(loaded.state.to_json() == text, "seed " + std::to_string(seed) + ": text differs");
  }

  const char* aliases = R"({"tasks": {
      "task0": {"id": "task0", "subtask requirement": "Outline", "status": "not started",
                "data": null, "next": ["task1"], "prev": [], "agent": "Writer"},
      "task1": {"subtask requirement": "Body", "status": "not started", "data": null,
                "next": [], "prev": ["task0"], "agent": "Writer"}}})";
  auto a = WorkflowState::from_json(aliases);
  v.require(a.state.at("task0").requirement == "Outline", "spaced requirement key");
  v.require(a.state.at("task0").children == std::vector<SubtaskId>{"task1"}, "next alias");
  v.require(a.state.at("task1").num_parents_not_completed == 1, "counter from next");

  auto doc = nlohmann::json::parse(WorkflowState::from_graph(fixtures::workflow2(), "g").to_json());
  doc["tasks"]["C"]["num_parents_not_completed"] = 5;
  auto repaired = WorkflowState::from_json(doc.dump());
  v.require(repaired.state.at("C").num_parents_not_completed == 2, "counter not repaired");
  v.require(repaired.warnings.size() == 1, "no warning for the counter mismatch");
  v.detail = "100 round trips, aliases, counter repair";
  return v;
}

Result llm_protocol() {
  using flow::testing::kSecret;
  Result v;
  flow::testing::LogCapture capture;
  auto config_for = [](const flow::testing::StubServer& s) {
    llm::ProviderConfig c;
    c.base_url = s.base();
    c.api_key = kSecret;
    c.model = "m";
    c.timeout = 5s;
    c.backoff_base = 1ms;
    return c;
  };
  llm::CompletionRequest hi;
  hi.messages = {{llm::Role::kUser, "hi"}};

  {
    flow::testing::StubServer s;
    s.script = {429, 503, 200};
    llm::Client c(config_for(s));
    std::vector<std::chrono::milliseconds> sleeps;
    c.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    auto out = c.complete(hi);
    v.require(out.attempts == 3 && s.hits() == 3, "429/503 not retried to success");
    v.require(sleeps.size() == 2 && sleeps[0] <= 1ms && sleeps[1] <= 2ms, "backoff out of bounds");
    v.require(!s.bodies().empty() &&
                  s.bodies()[0] ==
                      R"({"max_tokens":4096,"messages":[{"content":"hi","role":"user"}],"model":"m","temperature":0.7})",
              "request body differs");
    v.require(!s.auth().empty() && s.auth()[0] == std::string("Bearer ") + kSecret,
              "bearer header");
  }
  {
    flow::testing::StubServer s;
    s.script = {401};
    llm::Client c(config_for(s));
    bool auth = false;
    try {
      c.complete(hi);
    } catch (const AuthError& e) {
      auth = std::string(e.what()).find(kSecret) == std::string::npos;
    }
    v.require(auth && s.hits() == 1, "401 retried or not an auth error");
  }
  {
    flow::testing::StubServer s;
    s.script = {500, 500, 500};
    llm::Client c(config_for(s));
    c.set_sleeper([](std::chrono::milliseconds) {});
    bool transport = false;
    try {
      c.complete(hi);
    } catch (const TransportError&) {
      transport = true;
    }
    v.require(transport && s.hits() == 3, "5xx exhaustion");
  }
  std::size_t lines = 0;
  {
    std::lock_guard lock(capture.mu);
    lines = capture.lines.size();
    for (const auto& l : capture.lines)
      v.require(l.find(kSecret) == std::string::npos, "api key in log line");
  }
  v.require(lines > 0, "no log lines captured");
  v.detail = "retry, no-retry, exact body, " + std::to_string(lines) + " log lines clean";
  return v;
}

}  // namespace

int main() {
  log::set_level(log::Level::kError);
  struct Criterion {
    int number;
    const char* name;
    double limit_s;
    std::function<Result()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracle", 1, metric_oracle},
      {2, "structural properties", 30, structural_properties},
      {3, "selection rule", 5, selection_rule},
      {4, "recursion drop on an added edge", 60, theorem1_recursion},
      {5, "oracle equivalence", 180, oracle_equivalence},
      {6, "executor safety and liveness", 120, executor_safety},
      {7, "parallel dispatch", 10, concurrency},
      {8, "error-handling ablation", 30, error_handling_ablation},
      {9, "serialization", 5, serialization},
      {10, "llm client protocol", 10, llm_protocol},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Result v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    log::set_level(log::Level::kError);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s [%.2f s / %.0f s]\n", pass ? "PASS" : "FAIL", c.number, c.name,
                v.detail.c_str(), secs, c.limit_s);
    if (!in_time) std::printf("       over the time limit\n");
    for (const auto& f : v.failures) std::printf("       %s\n", f.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}

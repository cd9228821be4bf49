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

#include "ablation.hpp"

#include <cstdio>
#include <sstream>

#include "errors.hpp"
#include "fault_injector.hpp"
#include "fixtures.hpp"
#include "mock_planner.hpp"

namespace flow {

namespace {

constexpr const char* kAblationGoal =
    "Produce a short reviewed report from an outline and collected references.";

double rate(const std::vector<AblationRow>& rows, Outcome AblationRow::*field) {
  if (rows.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& r : rows) ok += (r.*field == Outcome::kSuccess);
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

RunReport run_arm(const SubtaskId& masked, std::uint64_t seed, int rounds,
                  const AblationConfig& config) {
  MockPlanner planner({fixtures::candidate_text(fixtures::workflow2(), kAblationGoal)});
  StubBackend agents;
  PlannerConfig pcfg;
  pcfg.k = 1;
  ExecutorConfig ecfg;
  ecfg.strategy = config.strategy;
  ecfg.max_refinement_rounds = rounds;
  RunOptions options;
  FaultInjector injector;
  injector.mask_ids = {masked};
  injector.sentinel = config.sentinel;
  injector.seed = seed;
  options.injector = injector;
  return run(TaskSpec{kAblationGoal, {}}, planner, agents, pcfg, ecfg, options);
}

}  // namespace

SubtaskId ablation_mask_choice(std::uint64_t seed) {
  const auto choices = fixtures::masked_blocking_choices();
  return choices[splitmix64(seed) % choices.size()];
}

double AblationReport::success_rate_with_update() const {
  return rate(rows, &AblationRow::with_update);
}

double AblationReport::success_rate_without_update() const {
  return rate(rows, &AblationRow::without_update);
}

std::string AblationReport::to_csv() const {
  std::ostringstream out;
  out << "seed,masked,with_update,without_update,repair_rounds\n";
  for (const auto& r : rows)
    out << r.seed << ',' << r.masked << ',' << outcome_token(r.with_update) << ','
        << outcome_token(r.without_update) << ',' << r.repair_rounds << '\n';
  return out.str();
}

std::string AblationReport::summary() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %-8s %-18s %-18s %s\n", "seed", "masked",
                "with update", "without update", "repair rounds");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-22llu %-8s %-18s %-18s %d\n",
                  static_cast<unsigned long long>(r.seed), r.masked.c_str(),
                  outcome_token(r.with_update), outcome_token(r.without_update), r.repair_rounds);
    out << line;
  }
  std::snprintf(line, sizeof line,
                "\nsuccess rate with update: %.0f%%\nsuccess rate without update: %.0f%%\n",
                100.0 * success_rate_with_update(), 100.0 * success_rate_without_update());
  out << line;
  return out.str();
}

AblationReport run_ablation(const AblationConfig& config) {
  if (config.seeds < 1) throw InvalidArgument("seeds must be >= 1");
  if (config.max_refinement_rounds < 1)
    throw InvalidArgument("the refinement arm needs max_refinement_rounds >= 1");
  AblationReport report;
  for (std::size_t i = 0; i < config.seeds; ++i) {
    AblationRow row;
    row.seed_index = i;
    row.seed = config.base_seed + i;
    row.masked = ablation_mask_choice(row.seed);
    auto with = run_arm(row.masked, row.seed, config.max_refinement_rounds, config);
    auto without = run_arm(row.masked, row.seed, 0, config);
    row.with_update = with.outcome;
    row.repair_rounds = with.repair_rounds;
    row.without_update = without.outcome;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace flow

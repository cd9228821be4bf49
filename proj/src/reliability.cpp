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

#include "reliability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "errors.hpp"
#include "fault_injector.hpp"

namespace flow::reliability {

void FailureModel::validate() const {
  if (!(p_f > 0.0 && p_f < 1.0))
    throw InvalidArgument("p_f must lie strictly between 0 and 1, got " + std::to_string(p_f));
}

const char* method_token(Method m) {
  switch (m) {
    case Method::kRecursion: return "recursion";
    case Method::kEnumeration: return "enumeration";
    case Method::kMonteCarlo: return "monte_carlo";
  }
  return "recursion";
}

namespace {

// Vertex-index view of a validated graph.
struct Indexed {
  std::vector<SubtaskId> ids;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::size_t> topo;
};

Indexed index_graph(const AovGraph& graph) {
  require_valid(graph);
  Indexed ix;
  std::map<SubtaskId, std::size_t> pos;
  for (const auto& v : graph.vertices()) {
    pos.emplace(v.id, ix.ids.size());
    ix.ids.push_back(v.id);
  }
  ix.parents.resize(ix.ids.size());
  std::vector<std::vector<std::size_t>> children(ix.ids.size());
  std::vector<std::size_t> indeg(ix.ids.size(), 0);
  for (const auto& e : graph.edges()) {
    auto f = pos.at(e.from), t = pos.at(e.to);
    ix.parents[t].push_back(f);
    children[f].push_back(t);
    ++indeg[t];
  }
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < indeg.size(); ++i)
    if (indeg[i] == 0) frontier.push_back(i);
  while (!frontier.empty()) {
    auto i = frontier.back();
    frontier.pop_back();
    ix.topo.push_back(i);
    for (auto c : children[i])
      if (--indeg[c] == 0) frontier.push_back(c);
  }
  return ix;
}

std::uint64_t trial_key(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed ^ splitmix64(trial + 0x632BE59BD9B4E019ULL));
}

struct McTally {
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
  std::vector<std::uint64_t> node;
};

McTally mc_chunk(const Indexed& ix, double p_f, std::uint64_t seed, std::size_t begin,
                 std::size_t end) {
  McTally t;
  t.node.assign(ix.ids.size(), 0);
  std::vector<char> done(ix.ids.size());
  for (std::size_t trial = begin; trial < end; ++trial) {
    const auto key = trial_key(seed, trial);
    std::uint64_t count = 0;
    for (auto i : ix.topo) {
      bool ok = unit_interval(splitmix64(key + i)) >= p_f;
      for (auto p : ix.parents[i]) ok = ok && done[p];
      done[i] = ok;
      if (ok) {
        ++count;
        ++t.node[i];
      }
    }
    t.sum += count;
    t.sum_sq += count * count;
  }
  return t;
}

}  // namespace

std::map<SubtaskId, double> success_probabilities_recursion(const AovGraph& graph,
                                                            const FailureModel& model) {
  model.validate();
  auto ix = index_graph(graph);
  std::vector<double> p(ix.ids.size(), 0.0);
  for (auto i : ix.topo) {
    double v = 1.0 - model.p_f;
    for (auto parent : ix.parents[i]) v *= p[parent];
    p[i] = v;
  }
  std::map<SubtaskId, double> out;
  for (std::size_t i = 0; i < p.size(); ++i) out.emplace(ix.ids[i], p[i]);
  return out;
}

SimResult expected_completed(const AovGraph& graph, const FailureModel& model, Method method,
                             std::size_t trials, std::uint64_t seed) {
  model.validate();
  SimResult r;
  r.method = method;
  if (method == Method::kRecursion) {
    r.per_node = success_probabilities_recursion(graph, model);
    for (const auto& [_, v] : r.per_node) r.expected_completed += v;
    return r;
  }

  auto ix = index_graph(graph);
  const std::size_t n = ix.ids.size();
  if (method == Method::kEnumeration) {
    if (n > kEnumerationCap)
      throw InvalidArgument("enumeration supports at most " + std::to_string(kEnumerationCap) +
                            " vertices, graph has " + std::to_string(n));
    const double q = 1.0 - model.p_f;
    std::vector<double> weight(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
      weight[k] = std::pow(q, static_cast<double>(k)) *
                  std::pow(model.p_f, static_cast<double>(n - k));
    std::vector<double> node(n, 0.0);
    std::vector<char> done(n);
    double total = 0.0;
    const std::uint64_t outcomes = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
      const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
      std::size_t count = 0;
      for (auto i : ix.topo) {
        bool ok = (mask >> i) & 1U;
        for (auto p : ix.parents[i]) ok = ok && done[p];
        done[i] = ok;
        if (ok) {
          ++count;
          node[i] += w;
        }
      }
      total += w * static_cast<double>(count);
    }
    r.expected_completed = total;
    for (std::size_t i = 0; i < n; ++i) r.per_node.emplace(ix.ids[i], node[i]);
    return r;
  }

  if (trials < 1) throw InvalidArgument("monte carlo needs at least one trial");
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  const std::size_t chunks = std::min(workers, trials);
  std::vector<McTally> tallies(chunks);
  {
    std::vector<std::jthread> pool;
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = trials * c / chunks, end = trials * (c + 1) / chunks;
      pool.emplace_back([&, c, begin, end] {
        tallies[c] = mc_chunk(ix, model.p_f, seed, begin, end);
      });
    }
  }
  std::uint64_t sum = 0, sum_sq = 0;
  std::vector<std::uint64_t> node(n, 0);
  for (const auto& t : tallies) {
    sum += t.sum;
    sum_sq += t.sum_sq;
    for (std::size_t i = 0; i < n; ++i) node[i] += t.node[i];
  }
  const double N = static_cast<double>(trials);
  const double mean = static_cast<double>(sum) / N;
  double var = 0.0;
  if (trials > 1)
    var = (static_cast<double>(sum_sq) - N * mean * mean) / (N - 1.0);
  r.expected_completed = mean;
  r.trials = trials;
  r.std_error = std::sqrt(std::max(var, 0.0) / N);
  r.seed = seed;
  for (std::size_t i = 0; i < n; ++i)
    r.per_node.emplace(ix.ids[i], static_cast<double>(node[i]) / N);
  return r;
}

namespace {

std::vector<Vertex> placeholder_vertices(std::size_t n) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n).size());
  std::vector<Vertex> out;
  for (std::size_t i = 1; i <= n; ++i) {
    auto num = std::to_string(i);
    SubtaskId id = "t" + std::string(width - num.size(), '0') + num;
    out.push_back({id, "placeholder subtask " + num, AgentRole{"worker", {}}});
  }
  return out;
}

}  // namespace

AovGraph random_dag(const DagSpec& spec) {
  if (spec.n < 1) throw InvalidArgument("random_dag needs n >= 1");
  if (!(spec.edge_probability >= 0.0 && spec.edge_probability <= 1.0))
    throw InvalidArgument("edge_probability must lie in [0, 1]");
  auto vertices = placeholder_vertices(spec.n);
  std::mt19937_64 rng(spec.seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < spec.n; ++i)
    for (std::size_t j = i + 1; j < spec.n; ++j)
      if (unit_interval(rng()) < spec.edge_probability)
        edges.push_back({vertices[i].id, vertices[j].id});
  return AovGraph(std::move(vertices), std::move(edges));
}

AovGraph random_out_forest(std::size_t n, std::uint64_t seed, double root_probability) {
  if (n < 1) throw InvalidArgument("random_out_forest needs n >= 1");
  auto vertices = placeholder_vertices(n);
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    if (unit_interval(rng()) < root_probability) continue;
    const auto parent = static_cast<std::size_t>(rng() % i);
    edges.push_back({vertices[parent].id, vertices[i].id});
  }
  return AovGraph(std::move(vertices), std::move(edges));
}

bool is_ancestor(const AovGraph& graph, const SubtaskId& a, const SubtaskId& v) {
  std::vector<SubtaskId> stack{a};
  std::set<SubtaskId> seen{a};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (const auto& c : graph.children(cur)) {
      if (c == v) return true;
      if (seen.insert(c).second) stack.push_back(c);
    }
  }
  return false;
}

AovGraph add_dependency(const AovGraph& graph, const SubtaskId& b, const SubtaskId& v_star) {
  if (!graph.contains(b)) throw InvalidArgument("unknown subtask '" + b + "'");
  if (!graph.contains(v_star)) throw InvalidArgument("unknown subtask '" + v_star + "'");
  if (graph.has_edge(b, v_star))
    throw ValidationError("edge " + b + " -> " + v_star + " already present");
  if (b == v_star || is_ancestor(graph, v_star, b))
    throw ValidationError("edge " + b + " -> " + v_star + " would create a cycle");
  return graph.with_edge(Edge{b, v_star});
}

std::vector<Edge> admissible_edges(const AovGraph& graph) {
  std::vector<Edge> out;
  auto ids = graph.ids();
  for (const auto& b : ids)
    for (const auto& v : ids)
      if (b != v && !graph.has_edge(b, v) && !is_ancestor(graph, v, b)) out.push_back({b, v});
  return out;
}

std::size_t Theorem1Report::recursion_violations() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.recursion_violation; }));
}

std::size_t Theorem1Report::trajectory_violations() const {
  return static_cast<std::size_t>(std::count_if(
      rows.begin(), rows.end(), [](const auto& r) { return r.trajectory_violation; }));
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

std::string fixed(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string Theorem1Report::to_csv() const {
  std::ostringstream out;
  out << "pair,n,p_f,E_rec_A,E_rec_B,delta,mc_A,mc_B,mc_se_A,mc_se_B,b_was_ancestor\n";
  for (const auto& r : rows)
    out << r.pair << ',' << r.n << ',' << num(r.p_f) << ',' << num(r.e_rec_a) << ','
        << num(r.e_rec_b) << ',' << num(r.delta) << ',' << opt_num(r.mc_a) << ','
        << opt_num(r.mc_b) << ',' << opt_num(r.mc_se_a) << ',' << opt_num(r.mc_se_b) << ','
        << (r.b_was_ancestor ? "true" : "false") << '\n';
  return out.str();
}

std::string Theorem1Report::summary() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-5s %-12s %12s %12s %12s %12s %12s %s\n", "pair", "edge",
                "E_rec_A", "E_rec_B", "delta", "mc_A", "mc_B", "ancestor");
  out << line;
  for (const auto& r : rows) {
    const std::string edge = r.b + "->" + r.v_star;
    std::snprintf(line, sizeof line, "%-5zu %-12s %12s %12s %12s %12s %12s %s\n", r.pair,
                  edge.c_str(), fixed(r.e_rec_a).c_str(), fixed(r.e_rec_b).c_str(),
                  fixed(r.delta).c_str(), r.mc_a ? fixed(*r.mc_a).c_str() : "-",
                  r.mc_b ? fixed(*r.mc_b).c_str() : "-", r.b_was_ancestor ? "yes" : "no");
    out << line;
  }
  std::size_t ancestor = 0;
  for (const auto& r : rows) ancestor += r.b_was_ancestor;
  out << "\npairs evaluated: " << rows.size() << ", skipped: " << skipped.size() << '\n';
  for (const auto& note : skipped) out << "  skipped " << note << '\n';
  out << "recursion: E_A > E_B in " << rows.size() - recursion_violations() << " of "
      << rows.size() << " pairs\n";
  out << "trajectory: " << ancestor
      << " pair(s) had b already an ancestor of v* (no change expected); "
      << trajectory_violations() << " other pair(s) without a measured drop\n";
  return out.str();
}

Theorem1Report theorem1_experiment(const DagSpec& spec, const FailureModel& model,
                                   std::size_t pairs, std::size_t trials) {
  model.validate();
  if (pairs < 1) throw InvalidArgument("pairs must be >= 1");
  Theorem1Report report;
  report.model = model;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::uint64_t pair_seed = splitmix64(spec.seed + i);
    auto a = random_dag({spec.n, spec.edge_probability, pair_seed});
    auto candidates = admissible_edges(a);
    if (candidates.empty()) {
      report.skipped.push_back("pair " + std::to_string(i) + ": no admissible edge");
      continue;
    }
    const auto& edge = candidates[splitmix64(pair_seed ^ 0xD1B54A32D192ED03ULL) % candidates.size()];
    auto b = add_dependency(a, edge.from, edge.to);

    auto pa = success_probabilities_recursion(a, model);
    auto pb = success_probabilities_recursion(b, model);
    Theorem1Row row;
    row.pair = i;
    row.n = spec.n;
    row.p_f = model.p_f;
    row.b = edge.from;
    row.v_star = edge.to;
    for (const auto& [id, v] : pa) {
      row.e_rec_a += v;
      row.e_rec_b += pb.at(id);
      // Summed per node: the drop can be far below one ulp of E itself.
      row.delta += v - pb.at(id);
    }
    row.predicted_delta = pa.at(edge.to) * (1.0 - pa.at(edge.from));
    row.node_delta = pa.at(edge.to) - pb.at(edge.to);
    row.b_was_ancestor = is_ancestor(a, edge.from, edge.to);
    row.v_star_is_sink = a.children(edge.to).empty();
    row.recursion_violation = !(row.delta > 0.0);
    if (trials > 0) {
      const std::uint64_t mc_seed = splitmix64(pair_seed + 1);
      auto ma = expected_completed(a, model, Method::kMonteCarlo, trials, mc_seed);
      auto mb = expected_completed(b, model, Method::kMonteCarlo, trials, mc_seed);
      row.mc_a = ma.expected_completed;
      row.mc_b = mb.expected_completed;
      row.mc_se_a = ma.std_error;
      row.mc_se_b = mb.std_error;
      row.trajectory_violation = !row.b_was_ancestor && !(*row.mc_a > *row.mc_b);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace flow::reliability

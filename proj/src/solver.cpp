#include "parplan/solver.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace parplan {
namespace {

constexpr std::int64_t kUnreachable = -1;
constexpr std::int64_t kNoDeadline = std::numeric_limits<std::int64_t>::max();

std::vector<std::int64_t> masked_eft(const TaskGraph& graph, const std::vector<char>& enabled) {
  const auto& rules = graph.indexed_rules();
  std::vector<std::int64_t> eft(graph.node_count(), kUnreachable);
  for (auto v : graph.topological_order()) {
    if (graph.is_initial(v)) {
      eft[v] = 0;
      continue;
    }
    for (auto ri : graph.rules_by_target()[v]) {
      if (!enabled[ri]) continue;
      std::int64_t ready = 0;
      bool ok = true;
      for (auto s : rules[ri].sources) {
        if (eft[s] == kUnreachable) {
          ok = false;
          break;
        }
        ready = std::max(ready, eft[s]);
      }
      if (ok && (eft[v] == kUnreachable || ready + rules[ri].time < eft[v])) eft[v] = ready + rules[ri].time;
    }
  }
  return eft;
}

struct Selection {
  std::vector<std::uint32_t> rules;  // indices into graph.rules()
  std::vector<std::uint32_t> ids;    // sorted rule ids
  std::int64_t cost = 0;
  std::int64_t finish_sum = 0;  // sum of sub-plan end times
  bool exact = false;
};

// Chooses one rule per needed node, walking nodes in reverse topological
// order so a node's deadline is final once all its consumers are decided.
// A rule is admissible for node v with deadline d when its latest source
// EFT plus its duration fits in d; sources then inherit d - duration.
// Deadlines never drop below EFT, so every partial choice can be completed.
class Extractor {
 public:
  Extractor(const TaskGraph& graph, const std::vector<char>& enabled, const std::vector<std::int64_t>& eft,
            bool exhaustive, std::size_t budget)
      : graph_(graph), rules_(graph.indexed_rules()), enabled_(enabled), eft_(eft), exhaustive_(exhaustive),
        budget_(budget) {
    const std::size_t n = graph.node_count();
    deadline_.assign(n, kNoDeadline);
    end_.assign(n, 0);
    needed_.assign(n, 0);
    min_cost_.assign(n, 0);
    estimate_.assign(n, 0.0);
    for (auto v : graph.topological_order()) {
      if (graph.is_initial(v) || eft_[v] == kUnreachable) continue;
      std::int64_t best_c = std::numeric_limits<std::int64_t>::max();
      double best_h = std::numeric_limits<double>::infinity();
      for (auto ri : usable_rules(v)) {
        best_c = std::min(best_c, rules_[ri].cost);
        double h = static_cast<double>(rules_[ri].cost);
        for (auto s : rules_[ri].sources) h += estimate_[s];
        best_h = std::min(best_h, h);
      }
      min_cost_[v] = best_c;
      estimate_[v] = best_h;
    }
  }

  Selection run() {
    const auto target = graph_.target_index();
    const auto& order = graph_.topological_order();
    needed_[target] = 1;
    deadline_[target] = eft_[target];
    lower_bound_ = min_cost_[target];
    search(static_cast<std::ptrdiff_t>(order.size()) - 1);
    best_.exact = exhaustive_ || !aborted_;
    return best_;
  }

 private:
  std::vector<std::uint32_t> usable_rules(std::uint32_t v) const {
    std::vector<std::uint32_t> out;
    for (auto ri : graph_.rules_by_target()[v]) {
      if (!enabled_[ri]) continue;
      const auto& src = rules_[ri].sources;
      if (std::all_of(src.begin(), src.end(), [&](auto s) { return eft_[s] != kUnreachable; })) out.push_back(ri);
    }
    return out;
  }

  std::int64_t ready_time(std::uint32_t ri) const {
    std::int64_t t = 0;
    for (auto s : rules_[ri].sources) t = std::max(t, eft_[s]);
    return t;
  }

  bool pruned(std::int64_t bound) const {
    if (!have_best_) return false;
    return exhaustive_ ? bound > best_.cost : bound >= best_.cost;
  }

  void record() {
    if (have_best_ && cost_ > best_.cost) return;
    // Chosen rules were picked consumers-first; replay them producers-first.
    std::int64_t finish_sum = 0;
    for (auto it = chosen_.rbegin(); it != chosen_.rend(); ++it) {
      const auto& r = rules_[*it];
      std::int64_t start = 0;
      for (auto s : r.sources) start = std::max(start, end_[s]);
      end_[r.target] = start + r.time;
      finish_sum += end_[r.target];
    }
    for (auto ri : chosen_) end_[rules_[ri].target] = 0;
    std::vector<std::uint32_t> ids;
    ids.reserve(chosen_.size());
    for (auto ri : chosen_) ids.push_back(graph_.rules()[ri].id());
    std::sort(ids.begin(), ids.end());
    if (!have_best_ || std::tie(cost_, finish_sum, ids) < std::tie(best_.cost, best_.finish_sum, best_.ids)) {
      best_.rules = chosen_;
      best_.ids = std::move(ids);
      best_.cost = cost_;
      best_.finish_sum = finish_sum;
      have_best_ = true;
    }
  }

  void search(std::ptrdiff_t pos) {
    const auto& order = graph_.topological_order();
    while (pos >= 0 && (!needed_[order[pos]] || graph_.is_initial(order[pos]))) --pos;
    if (pos < 0) {
      record();
      return;
    }
    if (have_best_ && !exhaustive_ && ++expansions_ > budget_) {
      aborted_ = true;
      return;
    }
    const auto v = order[pos];
    const auto d = deadline_[v];
    lower_bound_ -= min_cost_[v];

    struct Candidate {
      double estimate;
      std::int64_t time;
      std::uint32_t id;
      std::uint32_t rule;
    };
    std::vector<Candidate> candidates;
    for (auto ri : usable_rules(v)) {
      if (ready_time(ri) + rules_[ri].time > d) continue;
      double est = static_cast<double>(rules_[ri].cost);
      for (auto s : rules_[ri].sources) {
        if (!graph_.is_initial(s) && !needed_[s]) est += estimate_[s];
      }
      candidates.push_back({est, rules_[ri].time, graph_.rules()[ri].id(), ri});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.estimate, a.time, a.id) < std::tie(b.estimate, b.time, b.id);
    });

    struct Change {
      std::uint32_t node;
      std::int64_t old_deadline;
      bool was_needed;
    };
    std::vector<Change> changes;
    for (const auto& c : candidates) {
      const auto& rule = rules_[c.rule];
      changes.clear();
      for (auto s : rule.sources) {
        if (graph_.is_initial(s)) continue;
        const auto nd = d - rule.time;
        if (!needed_[s]) {
          changes.push_back({s, deadline_[s], false});
          needed_[s] = 1;
          deadline_[s] = nd;
          lower_bound_ += min_cost_[s];
        } else if (nd < deadline_[s]) {
          changes.push_back({s, deadline_[s], true});
          deadline_[s] = nd;
        }
      }
      cost_ += rule.cost;
      chosen_.push_back(c.rule);
      if (!pruned(cost_ + lower_bound_)) search(pos - 1);
      chosen_.pop_back();
      cost_ -= rule.cost;
      for (auto it = changes.rbegin(); it != changes.rend(); ++it) {
        deadline_[it->node] = it->old_deadline;
        if (!it->was_needed) {
          needed_[it->node] = 0;
          lower_bound_ -= min_cost_[it->node];
        }
      }
      if (aborted_) break;
    }
    lower_bound_ += min_cost_[v];
  }

  const TaskGraph& graph_;
  const std::vector<IndexedRule>& rules_;
  const std::vector<char>& enabled_;
  const std::vector<std::int64_t>& eft_;
  const bool exhaustive_;
  const std::size_t budget_;

  std::vector<std::int64_t> deadline_;
  std::vector<std::int64_t> end_;
  std::vector<char> needed_;
  std::vector<std::int64_t> min_cost_;
  std::vector<double> estimate_;
  std::vector<std::uint32_t> chosen_;
  std::int64_t cost_ = 0;
  std::int64_t lower_bound_ = 0;

  Selection best_;
  bool have_best_ = false;
  bool aborted_ = false;
  std::size_t expansions_ = 0;
};

std::optional<SolvedPlan> solve_masked(const TaskGraph& graph, const std::vector<char>& enabled,
                                       const SolveOptions& options) {
  auto eft = masked_eft(graph, enabled);
  if (eft[graph.target_index()] == kUnreachable) return std::nullopt;
  const bool exhaustive = graph.rules().size() <= options.exact_threshold;
  Extractor extractor(graph, enabled, eft, exhaustive, options.search_budget);
  Selection sel = extractor.run();

  SolvedPlan out;
  out.plan = plan_from_rules(graph, sel.rules);
  out.value = simulate(graph, out.plan).value();
  out.rule_ids = std::move(sel.ids);
  out.exact = sel.exact;
  return out;
}

std::int64_t finish_sum(const TaskGraph& graph, const Plan& plan) {
  std::int64_t sum = 0;
  for (const auto& [name, end] : simulate(graph, plan).end_times) sum += end;
  return sum;
}

bool better(const TaskGraph& graph, const SolvedPlan& a, const SolvedPlan& b) {
  if (a.value != b.value) return a.value < b.value;
  const auto fa = finish_sum(graph, a.plan), fb = finish_sum(graph, b.plan);
  if (fa != fb) return fa < fb;
  return a.rule_ids < b.rule_ids;
}

}  // namespace

std::optional<std::int64_t> EftTable::at(const NodeId& node) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
  if (it == nodes.end() || *it != node) return std::nullopt;
  return eft[static_cast<std::size_t>(it - nodes.begin())];
}

EftTable earliest_finish_times(const TaskGraph& graph) {
  std::vector<char> enabled(graph.rules().size(), 1);
  auto raw = masked_eft(graph, enabled);
  EftTable table;
  table.nodes = graph.nodes();
  table.eft.reserve(raw.size());
  for (auto e : raw) table.eft.push_back(e == kUnreachable ? std::nullopt : std::optional<std::int64_t>(e));
  return table;
}

Plan plan_from_rules(const TaskGraph& graph, std::vector<std::uint32_t> rule_indices) {
  const auto& rules = graph.rules();
  std::sort(rule_indices.begin(), rule_indices.end(),
            [&](auto a, auto b) { return rules[a].id() < rules[b].id(); });
  const std::size_t k = rule_indices.size();
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> producers;  // node number -> positions
  for (std::size_t i = 0; i < k; ++i) producers[rules[rule_indices[i]].target().number()].push_back(i);

  std::vector<std::vector<std::size_t>> deps(k), dependents(k);
  std::vector<std::size_t> indeg(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& s : rules[rule_indices[i]].sources()) {
      auto it = producers.find(s.number());
      if (it == producers.end()) continue;
      for (auto j : it->second) {
        deps[i].push_back(j);
        dependents[j].push_back(i);
        ++indeg[i];
      }
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < k; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto i = ready.top();
    ready.pop();
    order.push_back(i);
    for (auto w : dependents[i]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }

  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  Plan plan;
  for (auto i : order) {
    const Rule& rule = rules[rule_indices[i]];
    std::vector<std::size_t> dep_ranks;
    for (auto j : deps[i]) dep_ranks.push_back(rank[j]);
    std::sort(dep_ranks.begin(), dep_ranks.end());
    std::vector<std::string> names;
    for (auto r : dep_ranks) names.push_back("Subtask" + std::to_string(r + 1));
    plan.subtasks.push_back(
        SubPlan{"Subtask" + std::to_string(plan.size() + 1), rule.sources(), rule.target(), std::move(names)});
  }
  return plan;
}

SolvedPlan optimal_plan(const TaskGraph& graph, const SolveOptions& options) {
  std::vector<char> enabled(graph.rules().size(), 1);
  auto solved = solve_masked(graph, enabled, options);
  if (!solved) throw Error(ErrorCode::kUnreachableTarget, "target " + graph.target().str() + " is unreachable");
  return *std::move(solved);
}

std::optional<SolvedPlan> second_best_plan(const TaskGraph& graph, const SolvedPlan& opt,
                                           const SolveOptions& options) {
  std::unordered_map<std::uint32_t, std::uint32_t> index_of_id;
  for (std::uint32_t i = 0; i < graph.rules().size(); ++i) index_of_id.emplace(graph.rules()[i].id(), i);

  std::optional<SolvedPlan> best;
  for (auto id : opt.rule_ids) {
    std::vector<char> enabled(graph.rules().size(), 1);
    enabled[index_of_id.at(id)] = 0;
    auto candidate = solve_masked(graph, enabled, options);
    if (!candidate || candidate->rule_ids == opt.rule_ids) continue;
    if (!best || better(graph, *candidate, *best)) best = std::move(candidate);
  }
  return best;
}

SolvedPlan brute_force_solve(const TaskGraph& graph, std::size_t max_rules) {
  const auto& rules = graph.indexed_rules();
  const std::size_t n = graph.node_count();
  if (n > 64) throw Error(ErrorCode::kTooLarge, "brute force supports at most 64 nodes");

  // Rules whose target is the goal or one of its precedence ancestors.
  std::vector<char> relevant_node(n, 0);
  relevant_node[graph.target_index()] = 1;
  const auto& topo = graph.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if (!relevant_node[*it]) continue;
    for (auto ri : graph.rules_by_target()[*it]) {
      for (auto s : rules[ri].sources) relevant_node[s] = 1;
    }
  }
  std::vector<std::size_t> position(n);
  for (std::size_t p = 0; p < topo.size(); ++p) position[topo[p]] = p;
  std::vector<std::uint32_t> pool;
  for (std::uint32_t ri = 0; ri < rules.size(); ++ri) {
    if (relevant_node[rules[ri].target]) pool.push_back(ri);
  }
  if (pool.size() > max_rules) {
    throw Error(ErrorCode::kTooLarge, std::to_string(pool.size()) + " relevant rules exceed the brute-force guard of " +
                                          std::to_string(max_rules));
  }
  std::sort(pool.begin(), pool.end(), [&](auto a, auto b) { return position[rules[a].target] < position[rules[b].target]; });

  const std::size_t k = pool.size();
  std::uint64_t initial_bits = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (graph.is_initial(v)) initial_bits |= std::uint64_t{1} << v;
  }
  std::vector<std::uint64_t> source_bits(k, 0), target_bit(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (auto s : rules[pool[i]].sources) source_bits[i] |= std::uint64_t{1} << s;
    target_bit[i] = std::uint64_t{1} << rules[pool[i]].target;
  }
  const std::uint64_t goal_bit = std::uint64_t{1} << graph.target_index();

  bool found = false;
  PlanValue best_value;
  std::int64_t best_finish = 0;
  std::vector<std::uint32_t> best_ids;
  std::uint64_t best_mask = 0;
  std::vector<std::int64_t> node_end(n);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
    std::uint64_t produced = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask >> i & 1) produced |= target_bit[i];
    }
    if (!(produced & goal_bit)) continue;
    const std::uint64_t available = produced | initial_bits;
    bool valid = true;
    for (std::size_t i = 0; i < k && valid; ++i) {
      if ((mask >> i & 1) && (source_bits[i] & ~available)) valid = false;
    }
    if (!valid) continue;

    // Pool is in topological order of targets, so producers finish first.
    std::fill(node_end.begin(), node_end.end(), 0);
    PlanValue value;
    std::int64_t finish = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(mask >> i & 1)) continue;
      const auto& r = rules[pool[i]];
      std::int64_t start = 0;
      for (auto s : r.sources) start = std::max(start, node_end[s]);
      const std::int64_t end = start + r.time;
      node_end[r.target] = std::max(node_end[r.target], end);
      value.makespan = std::max(value.makespan, end);
      value.cost += r.cost;
      finish += end;
    }
    if (found && std::tie(value, finish) > std::tie(best_value, best_finish)) continue;
    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask >> i & 1) ids.push_back(graph.rules()[pool[i]].id());
    }
    std::sort(ids.begin(), ids.end());
    if (!found || std::tie(value, finish, ids) < std::tie(best_value, best_finish, best_ids)) {
      found = true;
      best_value = value;
      best_finish = finish;
      best_ids = std::move(ids);
      best_mask = mask;
    }
  }
  if (!found) throw Error(ErrorCode::kUnreachableTarget, "no rule subset reaches " + graph.target().str());

  std::vector<std::uint32_t> chosen;
  for (std::size_t i = 0; i < k; ++i) {
    if (best_mask >> i & 1) chosen.push_back(pool[i]);
  }
  SolvedPlan out;
  out.plan = plan_from_rules(graph, chosen);
  out.value = best_value;
  out.rule_ids = std::move(best_ids);
  out.exact = true;
  return out;
}

}  // namespace parplan

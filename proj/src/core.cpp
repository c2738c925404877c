#include "parplan/core.hpp"

#include <algorithm>
#include <charconv>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace parplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kUnmatchedRule: return "UnmatchedRule";
    case ErrorCode::kMalformedPlan: return "MalformedPlan";
    case ErrorCode::kInfeasibleEdgeCount: return "InfeasibleEdgeCount";
    case ErrorCode::kDegenerateGraph: return "DegenerateGraph";
    case ErrorCode::kUnreachableTarget: return "UnreachableTarget";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kEmptyRun: return "EmptyRun";
    case ErrorCode::kEmptyPlan: return "EmptyPlan";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kMissingBinding: return "MissingBinding";
    case ErrorCode::kNoJsonFound: return "NoJsonFound";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kAllRoundsFailed: return "AllRoundsFailed";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// NodeId

bool NodeId::is_valid(std::string_view label) noexcept {
  if (label.size() < 2 || label.size() > 20 || label[0] != 'N' || label[1] == '0') return false;
  return std::all_of(label.begin() + 1, label.end(), [](char c) { return c >= '0' && c <= '9'; });
}

NodeId::NodeId(std::string_view label) {
  if (!is_valid(label)) {
    throw Error(ErrorCode::kInvalidArgument, "bad node label '" + std::string(label) + "'");
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(label.data() + 1, label.data() + label.size(), value);
  if (ec != std::errc()) {
    throw Error(ErrorCode::kInvalidArgument, "node number out of range '" + std::string(label) + "'");
  }
  label_ = std::string(label);
  number_ = value;
}

NodeId NodeId::from_number(std::uint64_t number) {
  if (number == 0) throw Error(ErrorCode::kInvalidArgument, "node numbers start at 1");
  return NodeId("N" + std::to_string(number), number);
}

// ---------------------------------------------------------------------------
// Rule

Rule::Rule(std::uint32_t id, std::vector<NodeId> sources, NodeId target, std::int64_t time, std::int64_t cost)
    : id_(id), sources_(std::move(sources)), target_(std::move(target)), time_(time), cost_(cost) {
  const std::string where = "rule " + std::to_string(id_);
  if (sources_.empty()) throw Error(ErrorCode::kInvariantViolation, where + ": empty source set");
  std::sort(sources_.begin(), sources_.end());
  if (std::adjacent_find(sources_.begin(), sources_.end()) != sources_.end()) {
    throw Error(ErrorCode::kInvariantViolation, where + ": duplicate source node");
  }
  if (std::binary_search(sources_.begin(), sources_.end(), target_)) {
    throw Error(ErrorCode::kInvariantViolation, where + ": target " + target_.str() + " is also a source");
  }
  if (time_ < 1) throw Error(ErrorCode::kInvariantViolation, where + ": time must be >= 1");
  if (cost_ < 1) throw Error(ErrorCode::kInvariantViolation, where + ": cost must be >= 1");
}

bool Rule::same_transition(std::span<const NodeId> sorted_sources, const NodeId& target) const {
  return target == target_ && std::equal(sorted_sources.begin(), sorted_sources.end(), sources_.begin(),
                                         sources_.end());
}

// ---------------------------------------------------------------------------
// TaskGraph

TaskGraph::TaskGraph(std::vector<Rule> rules, std::vector<NodeId> initial_sources, NodeId target)
    : rules_(std::move(rules)), initial_(std::move(initial_sources)), target_(std::move(target)) {
  if (initial_.empty()) throw Error(ErrorCode::kInvariantViolation, "initial_source is empty");
  std::sort(initial_.begin(), initial_.end());
  if (std::adjacent_find(initial_.begin(), initial_.end()) != initial_.end()) {
    throw Error(ErrorCode::kInvariantViolation, "initial_source contains duplicates");
  }
  if (std::binary_search(initial_.begin(), initial_.end(), target_)) {
    throw Error(ErrorCode::kInvariantViolation, "target " + target_.str() + " is an initial source");
  }
  {
    std::unordered_set<std::uint32_t> ids;
    for (const auto& r : rules_) {
      if (!ids.insert(r.id()).second) {
        throw Error(ErrorCode::kInvariantViolation, "duplicate rule id " + std::to_string(r.id()));
      }
    }
  }

  std::set<NodeId> all(initial_.begin(), initial_.end());
  all.insert(target_);
  for (const auto& r : rules_) {
    all.insert(r.sources().begin(), r.sources().end());
    all.insert(r.target());
  }
  nodes_.assign(all.begin(), all.end());
  const auto n = static_cast<std::uint32_t>(nodes_.size());

  is_initial_.assign(n, 0);
  for (const auto& s : initial_) is_initial_[*index_of(s)] = 1;
  target_index_ = *index_of(target_);

  by_target_.assign(n, {});
  indexed_.reserve(rules_.size());
  for (std::uint32_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    IndexedRule ir;
    ir.target = *index_of(r.target());
    for (const auto& s : r.sources()) ir.sources.push_back(*index_of(s));
    ir.time = r.time();
    ir.cost = r.cost();
    if (is_initial_[ir.target]) {
      throw Error(ErrorCode::kInvariantViolation,
                  "initial source " + r.target().str() + " is produced by rule " + std::to_string(r.id()));
    }
    by_target_[ir.target].push_back(i);
    indexed_.push_back(std::move(ir));
  }

  // Kahn over the node precedence relation; smallest index first for determinism.
  std::vector<std::vector<std::uint32_t>> succ(n);
  std::vector<std::uint32_t> indeg(n, 0);
  for (const auto& ir : indexed_) {
    for (auto s : ir.sources) {
      succ[s].push_back(ir.target);
      ++indeg[ir.target];
    }
  }
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push(v);
  }
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (auto w : succ[v]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  if (topo_.size() != n) throw Error(ErrorCode::kInvariantViolation, "acyclicity: rule precedence has a cycle");

  // Least fixed point of "achieved".
  std::vector<char> achieved(is_initial_);
  for (auto v : topo_) {
    if (achieved[v]) continue;
    for (auto ri : by_target_[v]) {
      const auto& src = indexed_[ri].sources;
      if (std::all_of(src.begin(), src.end(), [&](auto s) { return achieved[s] != 0; })) {
        achieved[v] = 1;
        break;
      }
    }
  }
  if (!achieved[target_index_]) {
    throw Error(ErrorCode::kInvariantViolation, "achievability: target " + target_.str() + " is unreachable");
  }
}

std::optional<std::uint32_t> TaskGraph::index_of(const NodeId& node) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node);
  if (it == nodes_.end() || *it != node) return std::nullopt;
  return static_cast<std::uint32_t>(it - nodes_.begin());
}

std::vector<std::uint32_t> TaskGraph::matching_rules(std::span<const NodeId> sources, const NodeId& target) const {
  std::vector<NodeId> key(sources.begin(), sources.end());
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  std::vector<std::uint32_t> out;
  auto t = index_of(target);
  if (!t) return out;
  for (auto ri : by_target_[*t]) {
    if (rules_[ri].same_transition(key, target)) out.push_back(ri);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plan structure

bool StructureReport::has(StructureIssue issue) const {
  return std::any_of(issues.begin(), issues.end(), [&](const auto& p) { return p.first == issue; });
}

StructureReport check_plan_structure(const Plan& plan) {
  StructureReport report;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < plan.subtasks.size(); ++i) {
    const auto& p = plan.subtasks[i];
    if (p.name.empty()) report.issues.emplace_back(StructureIssue::kEmptyName, p.name);
    if (p.sources.empty()) report.issues.emplace_back(StructureIssue::kEmptySource, p.name);
    if (!index.emplace(p.name, i).second) report.issues.emplace_back(StructureIssue::kDuplicateName, p.name);
  }
  bool resolvable = true;
  for (const auto& p : plan.subtasks) {
    std::unordered_set<std::string> seen;
    for (const auto& d : p.dependencies) {
      if (!seen.insert(d).second) report.issues.emplace_back(StructureIssue::kDuplicateDependency, p.name);
      if (!index.count(d)) {
        report.issues.emplace_back(StructureIssue::kUnknownDependency, p.name);
        resolvable = false;
      }
    }
  }
  if (!resolvable || report.has(StructureIssue::kDuplicateName)) return report;

  // Cycle check over the resolved dependency relation.
  const std::size_t n = plan.subtasks.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::unordered_set<std::size_t> deps;
    for (const auto& d : plan.subtasks[i].dependencies) deps.insert(index.at(d));
    for (auto j : deps) {
      dependents[j].push_back(i);
      ++indeg[i];
    }
  }
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) stack.push_back(i);
  }
  std::size_t visited = 0;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    ++visited;
    for (auto w : dependents[v]) {
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  if (visited != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (indeg[i] != 0) report.issues.emplace_back(StructureIssue::kCyclicDependencies, plan.subtasks[i].name);
    }
  }
  return report;
}

std::vector<std::size_t> dependency_order(const Plan& plan) {
  const std::size_t n = plan.subtasks.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(plan.subtasks[i].name, i);
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& d : plan.subtasks[i].dependencies) {
      dependents[index.at(d)].push_back(i);
      ++indeg[i];
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto w : dependents[v]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  return order;
}

// ---------------------------------------------------------------------------
// Scheduling

std::strong_ordering compare_plans(const PlanValue& a, const PlanValue& b) noexcept { return a <=> b; }

ScheduleResult simulate(const TaskGraph& graph, const Plan& plan) {
  auto report = check_plan_structure(plan);
  if (!report.ok()) {
    const auto& name = report.issues.front().second;
    throw Error(ErrorCode::kMalformedPlan, "structural check failed at sub-plan '" + name + "'");
  }

  const auto& rules = graph.rules();
  std::vector<const Rule*> matched(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& p = plan.subtasks[i];
    auto hits = graph.matching_rules(p.sources, p.target);
    if (hits.empty()) throw Error(ErrorCode::kUnmatchedRule, "sub-plan '" + p.name + "' matches no rule");
    // Duplicate transitions can only come from hand-written graphs; take the
    // fastest, then cheapest.
    auto best = *std::min_element(hits.begin(), hits.end(), [&](auto a, auto b) {
      return std::tuple(rules[a].time(), rules[a].cost(), rules[a].id()) <
             std::tuple(rules[b].time(), rules[b].cost(), rules[b].id());
    });
    matched[i] = &rules[best];
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < plan.size(); ++i) index.emplace(plan.subtasks[i].name, i);
  std::vector<std::int64_t> end(plan.size(), 0);
  ScheduleResult result;
  for (auto i : dependency_order(plan)) {
    std::int64_t start = 0;
    for (const auto& d : plan.subtasks[i].dependencies) start = std::max(start, end[index.at(d)]);
    end[i] = start + matched[i]->time();
    result.end_times[plan.subtasks[i].name] = end[i];
    result.makespan = std::max(result.makespan, end[i]);
    result.total_cost += matched[i]->cost();
    result.duration_sum += matched[i]->time();
  }
  return result;
}

}  // namespace parplan

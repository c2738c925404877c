#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parplan/error.hpp"

namespace parplan {

// A task-graph vertex label: "N" followed by a positive decimal integer
// without leading zeros. Ordered numerically, so N2 < N10.
class NodeId {
 public:
  explicit NodeId(std::string_view label);
  static NodeId from_number(std::uint64_t number);

  static bool is_valid(std::string_view label) noexcept;

  const std::string& str() const noexcept { return label_; }
  std::uint64_t number() const noexcept { return number_; }

  friend bool operator==(const NodeId& a, const NodeId& b) noexcept { return a.number_ == b.number_; }
  friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) noexcept {
    return a.number_ <=> b.number_;
  }

 private:
  NodeId(std::string label, std::uint64_t number) : label_(std::move(label)), number_(number) {}

  std::string label_;
  std::uint64_t number_ = 0;
};

// One transformation: once every source node is achieved, the target can be
// produced after `time` units at `cost`. Sources are stored sorted and unique.
class Rule {
 public:
  Rule(std::uint32_t id, std::vector<NodeId> sources, NodeId target, std::int64_t time, std::int64_t cost);

  std::uint32_t id() const noexcept { return id_; }
  const std::vector<NodeId>& sources() const noexcept { return sources_; }
  const NodeId& target() const noexcept { return target_; }
  std::int64_t time() const noexcept { return time_; }
  std::int64_t cost() const noexcept { return cost_; }

  // Same source set and target; id, time and cost are ignored.
  bool same_transition(std::span<const NodeId> sorted_sources, const NodeId& target) const;

  friend bool operator==(const Rule&, const Rule&) = default;

 private:
  std::uint32_t id_;
  std::vector<NodeId> sources_;
  NodeId target_;
  std::int64_t time_;
  std::int64_t cost_;
};

// Index-based view of a rule used by the scheduling algorithms.
struct IndexedRule {
  std::uint32_t target = 0;
  std::vector<std::uint32_t> sources;
  std::int64_t time = 0;
  std::int64_t cost = 0;
};

// A validated task instance: rules plus the query (initial sources, target).
// Construction enforces every structural invariant, so a TaskGraph value is
// always acyclic, its initial sources have no producing rule, and the target
// is achievable.
class TaskGraph {
 public:
  TaskGraph(std::vector<Rule> rules, std::vector<NodeId> initial_sources, NodeId target);

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const std::vector<NodeId>& initial_sources() const noexcept { return initial_; }
  const NodeId& target() const noexcept { return target_; }

  // Every node mentioned by the rules or the query, numerically sorted.
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::optional<std::uint32_t> index_of(const NodeId& node) const;

  const std::vector<IndexedRule>& indexed_rules() const noexcept { return indexed_; }
  const std::vector<std::vector<std::uint32_t>>& rules_by_target() const noexcept { return by_target_; }
  const std::vector<std::uint32_t>& topological_order() const noexcept { return topo_; }
  std::uint32_t target_index() const noexcept { return target_index_; }
  bool is_initial(std::uint32_t node) const noexcept { return is_initial_[node] != 0; }

  // Rule indices whose source set and target match exactly; normally one.
  std::vector<std::uint32_t> matching_rules(std::span<const NodeId> sources, const NodeId& target) const;

  friend bool operator==(const TaskGraph& a, const TaskGraph& b) {
    return a.rules_ == b.rules_ && a.initial_ == b.initial_ && a.target_ == b.target_;
  }

 private:
  std::vector<Rule> rules_;
  std::vector<NodeId> initial_;
  NodeId target_;

  std::vector<NodeId> nodes_;
  std::vector<IndexedRule> indexed_;
  std::vector<std::vector<std::uint32_t>> by_target_;
  std::vector<std::uint32_t> topo_;
  std::vector<char> is_initial_;
  std::uint32_t target_index_ = 0;
};

struct SubPlan {
  std::string name;
  std::vector<NodeId> sources;
  NodeId target;
  std::vector<std::string> dependencies;

  friend bool operator==(const SubPlan&, const SubPlan&) = default;
};

// Plans arrive from untrusted producers (model output), so Plan is a plain
// aggregate and its structural invariants are checked on demand.
struct Plan {
  std::vector<SubPlan> subtasks;

  bool empty() const noexcept { return subtasks.empty(); }
  std::size_t size() const noexcept { return subtasks.size(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

enum class StructureIssue {
  kEmptyName,
  kDuplicateName,
  kEmptySource,
  kDuplicateDependency,
  kUnknownDependency,
  kCyclicDependencies,
};

struct StructureReport {
  std::vector<std::pair<StructureIssue, std::string>> issues;  // (issue, sub-plan name)

  bool ok() const noexcept { return issues.empty(); }
  bool has(StructureIssue issue) const;
};

StructureReport check_plan_structure(const Plan& plan);

// Sub-plan indices in an order where every dependency precedes its
// dependents. Requires a structurally valid plan.
std::vector<std::size_t> dependency_order(const Plan& plan);

// (makespan, cost) ordered lexicographically. This is the exact integer
// realization of makespan + eps * cost for any eps below 1 / (cost spread).
struct PlanValue {
  std::int64_t makespan = 0;
  std::int64_t cost = 0;

  friend auto operator<=>(const PlanValue&, const PlanValue&) = default;
};

std::strong_ordering compare_plans(const PlanValue& a, const PlanValue& b) noexcept;

struct ScheduleResult {
  std::map<std::string, std::int64_t> end_times;
  std::int64_t makespan = 0;
  std::int64_t total_cost = 0;
  std::int64_t duration_sum = 0;  // sequential execution time

  PlanValue value() const noexcept { return {makespan, total_cost}; }
};

// Executes the plan with unbounded parallelism: a sub-plan starts when all
// listed dependencies have ended. Each sub-plan is charged its matched
// rule's cost, so a rule used twice is paid twice.
ScheduleResult simulate(const TaskGraph& graph, const Plan& plan);

}  // namespace parplan

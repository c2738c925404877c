#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parplan/core.hpp"

namespace parplan {

// Earliest finish time per node: 0 for initial sources, otherwise the best
// rule's (latest source EFT + duration). Unreachable nodes hold nullopt.
struct EftTable {
  std::vector<NodeId> nodes;                     // graph.nodes()
  std::vector<std::optional<std::int64_t>> eft;  // parallel to nodes

  std::optional<std::int64_t> at(const NodeId& node) const;
};

EftTable earliest_finish_times(const TaskGraph& graph);

struct SolveOptions {
  // Graphs with at most this many rules get an exhaustive branch-and-bound,
  // so the cost among fastest plans is exactly minimal.
  std::size_t exact_threshold = 24;
  // Search-node budget for larger graphs. The first descent is the greedy
  // extraction; the remaining budget only ever lowers its cost.
  std::size_t search_budget = 4000;
};

struct SolvedPlan {
  Plan plan;
  PlanValue value;
  std::vector<std::uint32_t> rule_ids;  // sorted
  bool exact = false;                   // cost proven minimal
};

// Sub-plans for a set of rules (indices into graph.rules()), named
// Subtask1.. in a dependency-respecting order (ready sub-plans by lowest
// rule id first). A sub-plan depends on every sub-plan producing one of
// its sources.
Plan plan_from_rules(const TaskGraph& graph, std::vector<std::uint32_t> rule_indices);

// Fastest plan, then cheapest among those. The makespan always equals the
// target's EFT. Ties in cost go to the plan whose sub-plans finish earliest
// in total, then to the lexicographically smallest sorted rule-id set
// (exact mode). Throws kUnreachableTarget.
SolvedPlan optimal_plan(const TaskGraph& graph, const SolveOptions& options = {});

// Best plan whose rule set differs from `opt`, found by re-solving with each
// rule of `opt` forbidden in turn. Results are minimal plans.
std::optional<SolvedPlan> second_best_plan(const TaskGraph& graph, const SolvedPlan& opt,
                                           const SolveOptions& options = {});

// Exhaustive oracle: every subset of the rules that can reach the target
// (by plain precedence reachability) is scheduled and the minimum
// (makespan, cost) kept. Throws kTooLarge above `max_rules` such rules.
SolvedPlan brute_force_solve(const TaskGraph& graph, std::size_t max_rules = 20);

}  // namespace parplan

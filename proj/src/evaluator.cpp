#include "parplan/evaluator.hpp"

#include <array>
#include <unordered_map>

namespace parplan {
namespace {

constexpr std::array<std::pair<PlanError, std::string_view>, 9> kErrorNames{{
    {PlanError::kInvalidSubtask, "InvalidSubtask"},
    {PlanError::kUnavailableSource, "UnavailableSource"},
    {PlanError::kCyclicDependencies, "CyclicDependencies"},
    {PlanError::kMalformedPlan, "MalformedPlan"},
    {PlanError::kTargetNotReached, "TargetNotReached"},
    {PlanError::kNoJsonFound, "NoJsonFound"},
    {PlanError::kSchemaMismatch, "SchemaMismatch"},
    {PlanError::kTransportFailure, "TransportFailure"},
    {PlanError::kExtractionFailed, "ExtractionFailed"},
}};

}  // namespace

std::string_view to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kOptimal: return "Optimal";
    case PlanStatus::kFeasible: return "Feasible";
    case PlanStatus::kFailed: return "Failed";
  }
  return "Failed";
}

std::string_view to_string(PlanError e) {
  for (const auto& [kind, name] : kErrorNames) {
    if (kind == e) return name;
  }
  return "Unknown";
}

PlanStatus parse_plan_status(std::string_view s) {
  if (s == "Optimal") return PlanStatus::kOptimal;
  if (s == "Feasible") return PlanStatus::kFeasible;
  if (s == "Failed") return PlanStatus::kFailed;
  throw Error(ErrorCode::kInvalidArgument, "unknown plan status '" + std::string(s) + "'");
}

PlanError parse_plan_error(std::string_view s) {
  for (const auto& [kind, name] : kErrorNames) {
    if (name == s) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown plan error '" + std::string(s) + "'");
}

PlanVerdict PlanVerdict::failed(PlanError error) {
  PlanVerdict v;
  v.errors.insert(error);
  return v;
}

PlanVerdict validate_plan(const TaskGraph& graph, const Plan& plan, const PlanValue& opt) {
  PlanVerdict verdict;
  auto structure = check_plan_structure(plan);
  if (!structure.ok()) {
    for (const auto& [issue, name] : structure.issues) {
      verdict.errors.insert(issue == StructureIssue::kCyclicDependencies ? PlanError::kCyclicDependencies
                                                                         : PlanError::kMalformedPlan);
    }
    return verdict;
  }

  std::unordered_map<std::string, const SubPlan*> by_name;
  for (const auto& p : plan.subtasks) by_name.emplace(p.name, &p);

  bool target_produced = false;
  for (const auto& p : plan.subtasks) {
    if (graph.matching_rules(p.sources, p.target).empty()) verdict.errors.insert(PlanError::kInvalidSubtask);
    for (const auto& s : p.sources) {
      auto idx = graph.index_of(s);
      if (idx && graph.is_initial(*idx)) continue;
      bool supplied = false;
      for (const auto& d : p.dependencies) {
        if (by_name.at(d)->target == s) {
          supplied = true;
          break;
        }
      }
      if (!supplied) verdict.errors.insert(PlanError::kUnavailableSource);
    }
    if (p.target == graph.target()) target_produced = true;
  }
  if (!target_produced) verdict.errors.insert(PlanError::kTargetNotReached);
  if (!verdict.errors.empty()) return verdict;

  verdict.schedule = simulate(graph, plan);
  verdict.status = verdict.schedule->value() <= opt ? PlanStatus::kOptimal : PlanStatus::kFeasible;

  // Walk dependencies backwards from every producer of the goal.
  std::vector<const SubPlan*> stack;
  std::set<std::string> useful;
  for (const auto& p : plan.subtasks) {
    if (p.target == graph.target() && useful.insert(p.name).second) stack.push_back(&p);
  }
  while (!stack.empty()) {
    const SubPlan* p = stack.back();
    stack.pop_back();
    for (const auto& d : p->dependencies) {
      if (useful.insert(d).second) stack.push_back(by_name.at(d));
    }
  }
  for (const auto& p : plan.subtasks) {
    if (!useful.count(p.name)) verdict.redundant_subtasks.insert(p.name);
  }
  return verdict;
}

std::map<PlanError, double> error_proportions(const std::vector<PlanVerdict>& verdicts) {
  std::map<PlanError, double> out;
  for (const auto& [kind, name] : kErrorNames) out[kind] = 0.0;
  if (verdicts.empty()) return out;
  std::map<PlanError, std::size_t> counts;
  for (const auto& v : verdicts) {
    for (auto e : v.errors) ++counts[e];
  }
  for (auto& [kind, value] : out) {
    value = static_cast<double>(counts[kind]) / static_cast<double>(verdicts.size());
  }
  return out;
}

}  // namespace parplan

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "parplan/core.hpp"

namespace parplan {

enum class PlanStatus { kOptimal, kFeasible, kFailed };

// The first five kinds come from plan validation. The remaining ones are
// recorded by the evaluation harness when no plan could be obtained.
enum class PlanError {
  kInvalidSubtask,
  kUnavailableSource,
  kCyclicDependencies,
  kMalformedPlan,
  kTargetNotReached,
  kNoJsonFound,
  kSchemaMismatch,
  kTransportFailure,
  kExtractionFailed,
};

std::string_view to_string(PlanStatus s);
std::string_view to_string(PlanError e);
PlanStatus parse_plan_status(std::string_view s);
PlanError parse_plan_error(std::string_view s);

struct PlanVerdict {
  PlanStatus status = PlanStatus::kFailed;
  std::set<PlanError> errors;
  std::optional<ScheduleResult> schedule;
  std::set<std::string> redundant_subtasks;

  bool succeeded() const noexcept { return status != PlanStatus::kFailed; }

  static PlanVerdict failed(PlanError error);
};

// Structural problems (MalformedPlan, CyclicDependencies) end the check.
// Otherwise every sub-plan is checked for a matching rule (InvalidSubtask)
// and for source availability (UnavailableSource): each source must be
// initial or the target of a listed dependency. Extra dependencies are
// allowed. TargetNotReached means no sub-plan produces the goal. An
// error-free plan is scheduled and rated Optimal when its (makespan, cost)
// is no worse than `opt`.
PlanVerdict validate_plan(const TaskGraph& graph, const Plan& plan, const PlanValue& opt);

// Fraction of verdicts containing each error kind; a verdict with several
// kinds counts once for each. Kinds that never occur are reported as 0.
std::map<PlanError, double> error_proportions(const std::vector<PlanVerdict>& verdicts);

}  // namespace parplan

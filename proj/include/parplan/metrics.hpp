#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "parplan/evaluator.hpp"
#include "parplan/graphgen.hpp"
#include "parplan/json_io.hpp"

namespace parplan {

using Rational = boost::multiprecision::cpp_rational;

// Decimal rendering of an exact rational, rounded half away from zero.
std::string format_decimal(const Rational& value, int digits);
double to_double(const Rational& value);

// What scoring needs from one evaluated case.
struct CaseOutcome {
  PlanStatus status = PlanStatus::kFailed;
  std::optional<PlanValue> achieved;  // present unless Failed
  PlanValue opt;

  static CaseOutcome from(const PlanVerdict& verdict, const PlanValue& opt);
};

struct RunReport {
  std::size_t n = 0;
  std::size_t optimal = 0;
  std::size_t feasible = 0;
  Rational optimal_rate;
  Rational success_rate;
  Rational feasible_rate;
  Rational avg_time_ratio;
  Rational avg_cost_ratio;

  Json to_json() const;
};

// Failed cases contribute this ratio to both time and cost averages.
inline constexpr int kFailurePenalty = 4;

// OR = optimal/n, SR = (optimal + feasible)/n, FR = SR - OR; time and cost
// ratios are averaged against the optimum with failures at the penalty.
// Throws kEmptyRun for an empty list.
RunReport score_run(std::span<const CaseOutcome> cases);

// Makespan over the sum of sub-plan durations. Throws kEmptyPlan.
Rational parallel_sequential_ratio(const TaskGraph& graph, const Plan& plan);

struct Correlation {
  double r = 0.0;
  double slope = 0.0;
};

// Both series are min-max normalized, then Pearson r and the least-squares
// slope are computed and rounded to two decimals. Throws kDegenerateInput
// for fewer than two points, length mismatch, or a constant series.
Correlation correlation_stats(std::span<const double> xs, std::span<const double> ys);

enum class GroupKey { kNodeCount, kEdgeBucket, kStructure, kNodeStructure };
GroupKey parse_group_key(std::string_view s);  // node_count | edge_bucket | structure | node_structure

struct MetricRow {
  CaseOutcome outcome;
  InstanceMeta meta;
  std::optional<Rational> parallel_ratio;  // for successful plans
};

struct GroupRow {
  std::string key;
  RunReport report;
  std::optional<Rational> mean_parallel_ratio;
};

Json to_json(const InstanceMeta& meta);
InstanceMeta meta_from_json(const Json& j);  // throws kSchemaMismatch

// One line of verdicts.jsonl: {"status", "makespan"?, "cost"?,
// "duration_sum"?, "opt": {"makespan","cost"}, "meta"?, ...}. Lines without
// meta group under zero/default values. Throws kSchemaMismatch.
MetricRow metric_row_from_json(const Json& j);

// Groups in ascending key order (numeric for counts and buckets).
std::vector<GroupRow> aggregate_by(GroupKey key, std::span<const MetricRow> rows, std::size_t edge_bucket_width = 10);

// Header row uses the report column names; rates are percentages with one
// decimal, ratios three decimals.
std::string to_csv(const std::vector<GroupRow>& table);

}  // namespace parplan

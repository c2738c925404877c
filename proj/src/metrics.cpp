#include "parplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace parplan {

using boost::multiprecision::cpp_int;

std::string format_decimal(const Rational& value, int digits) {
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const Rational scaled = value * scale;
  const cpp_int num = boost::multiprecision::numerator(scaled);
  const cpp_int den = boost::multiprecision::denominator(scaled);
  const bool negative = num < 0;
  const cpp_int magnitude = (2 * (negative ? cpp_int(-num) : num) + den) / (2 * den);
  std::string text = magnitude.str();
  if (digits > 0) {
    if (text.size() <= static_cast<std::size_t>(digits)) text.insert(0, digits + 1 - text.size(), '0');
    text.insert(text.size() - digits, ".");
  }
  if (negative && magnitude != 0) text.insert(0, "-");
  return text;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

CaseOutcome CaseOutcome::from(const PlanVerdict& verdict, const PlanValue& opt) {
  CaseOutcome c;
  c.status = verdict.status;
  c.opt = opt;
  if (verdict.succeeded() && verdict.schedule) c.achieved = verdict.schedule->value();
  return c;
}

Json RunReport::to_json() const {
  Json j;
  j["n"] = n;
  j["optimal"] = optimal;
  j["feasible"] = feasible;
  j["optimal_rate"] = to_double(optimal_rate);
  j["success_rate"] = to_double(success_rate);
  j["feasible_rate"] = to_double(feasible_rate);
  j["avg_time_ratio"] = to_double(avg_time_ratio);
  j["avg_cost_ratio"] = to_double(avg_cost_ratio);
  j["exact"] = {
      {"optimal_rate", optimal_rate.str()},   {"success_rate", success_rate.str()},
      {"feasible_rate", feasible_rate.str()}, {"avg_time_ratio", avg_time_ratio.str()},
      {"avg_cost_ratio", avg_cost_ratio.str()},
  };
  return j;
}

RunReport score_run(std::span<const CaseOutcome> cases) {
  if (cases.empty()) throw Error(ErrorCode::kEmptyRun, "no cases to score");
  RunReport report;
  report.n = cases.size();
  Rational time_sum = 0, cost_sum = 0;
  for (const auto& c : cases) {
    if (c.status == PlanStatus::kFailed || !c.achieved) {
      time_sum += kFailurePenalty;
      cost_sum += kFailurePenalty;
      continue;
    }
    if (c.status == PlanStatus::kOptimal) ++report.optimal;
    if (c.status == PlanStatus::kFeasible) ++report.feasible;
    if (c.opt.makespan <= 0 || c.opt.cost <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "optimum must have positive makespan and cost");
    }
    time_sum += Rational(c.achieved->makespan, c.opt.makespan);
    cost_sum += Rational(c.achieved->cost, c.opt.cost);
  }
  const Rational n(static_cast<long long>(report.n));
  report.optimal_rate = Rational(static_cast<long long>(report.optimal)) / n;
  report.success_rate = Rational(static_cast<long long>(report.optimal + report.feasible)) / n;
  report.feasible_rate = report.success_rate - report.optimal_rate;
  report.avg_time_ratio = time_sum / n;
  report.avg_cost_ratio = cost_sum / n;
  return report;
}

Rational parallel_sequential_ratio(const TaskGraph& graph, const Plan& plan) {
  if (plan.empty()) throw Error(ErrorCode::kEmptyPlan, "ratio of an empty plan is undefined");
  auto schedule = simulate(graph, plan);
  return Rational(schedule.makespan, schedule.duration_sum);
}

Correlation correlation_stats(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::kDegenerateInput, "series lengths differ");
  if (xs.size() < 2) throw Error(ErrorCode::kDegenerateInput, "need at least two points");
  auto normalize = [](std::span<const double> v, const char* name) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (!(*hi > *lo)) throw Error(ErrorCode::kDegenerateInput, std::string(name) + " series is constant");
    std::vector<double> out;
    out.reserve(v.size());
    for (double x : v) out.push_back((x - *lo) / (*hi - *lo));
    return out;
  };
  const auto x = normalize(xs, "x");
  const auto y = normalize(ys, "y");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  const double mx = sx / n, my = sy / n;
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  auto round2 = [](double v) {
    double r = std::round(v * 100.0) / 100.0;
    return r == 0.0 ? 0.0 : r;  // no "-0.00"
  };
  Correlation c;
  c.r = round2(cov / std::sqrt(vx * vy));
  c.slope = round2((n * sxy - sx * sy) / (n * sxx - sx * sx));
  return c;
}

Json to_json(const InstanceMeta& meta) {
  Json j;
  j["node_count"] = meta.node_count;
  j["edge_count"] = meta.edge_count;
  j["structure"] = std::string(to_string(meta.structure));
  j["edge_relation"] = std::string(to_string(meta.edge_relation));
  j["seed"] = meta.seed;
  return j;
}

InstanceMeta meta_from_json(const Json& j) {
  try {
    InstanceMeta m;
    m.node_count = j.at("node_count").get<std::uint32_t>();
    m.edge_count = j.at("edge_count").get<std::size_t>();
    m.structure = parse_structure(j.at("structure").get<std::string>());
    m.edge_relation = parse_edge_relation(j.at("edge_relation").get<std::string>());
    m.seed = j.value("seed", std::uint64_t{0});
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("meta: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("meta: ") + e.what());
  }
}

MetricRow metric_row_from_json(const Json& j) {
  MetricRow row;
  try {
    row.outcome.status = parse_plan_status(j.at("status").get<std::string>());
    const auto& opt = j.at("opt");
    row.outcome.opt = {opt.at("makespan").get<std::int64_t>(), opt.at("cost").get<std::int64_t>()};
    if (row.outcome.status != PlanStatus::kFailed) {
      PlanValue v{j.at("makespan").get<std::int64_t>(), j.at("cost").get<std::int64_t>()};
      row.outcome.achieved = v;
      if (j.contains("duration_sum")) {
        const auto sum = j["duration_sum"].get<std::int64_t>();
        if (sum > 0) row.parallel_ratio = Rational(v.makespan, sum);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("verdict: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("verdict: ") + e.what());
  }
  if (j.contains("meta") && !j["meta"].is_null()) row.meta = meta_from_json(j["meta"]);
  return row;
}

GroupKey parse_group_key(std::string_view s) {
  if (s == "node_count") return GroupKey::kNodeCount;
  if (s == "edge_bucket") return GroupKey::kEdgeBucket;
  if (s == "structure") return GroupKey::kStructure;
  if (s == "node_structure") return GroupKey::kNodeStructure;
  throw Error(ErrorCode::kInvalidArgument, "unknown group key '" + std::string(s) + "'");
}

std::vector<GroupRow> aggregate_by(GroupKey key, std::span<const MetricRow> rows, std::size_t edge_bucket_width) {
  if (edge_bucket_width == 0) throw Error(ErrorCode::kInvalidArgument, "edge bucket width must be positive");
  using SortKey = std::tuple<std::size_t, std::string>;
  std::map<SortKey, std::vector<const MetricRow*>> groups;
  for (const auto& row : rows) {
    SortKey k;
    switch (key) {
      case GroupKey::kNodeCount:
        k = {row.meta.node_count, std::to_string(row.meta.node_count)};
        break;
      case GroupKey::kEdgeBucket: {
        const std::size_t lo = row.meta.edge_count / edge_bucket_width * edge_bucket_width;
        k = {lo, std::to_string(lo) + "-" + std::to_string(lo + edge_bucket_width - 1)};
        break;
      }
      case GroupKey::kStructure:
        k = {0, std::string(to_string(row.meta.structure))};
        break;
      case GroupKey::kNodeStructure:
        k = {row.meta.node_count, std::to_string(row.meta.node_count) + "/" + std::string(to_string(row.meta.structure))};
        break;
    }
    groups[k].push_back(&row);
  }

  std::vector<GroupRow> table;
  for (const auto& [k, members] : groups) {
    std::vector<CaseOutcome> outcomes;
    Rational ratio_sum = 0;
    long long ratio_count = 0;
    for (const auto* m : members) {
      outcomes.push_back(m->outcome);
      if (m->parallel_ratio) {
        ratio_sum += *m->parallel_ratio;
        ++ratio_count;
      }
    }
    GroupRow row;
    row.key = std::get<1>(k);
    row.report = score_run(outcomes);
    if (ratio_count > 0) row.mean_parallel_ratio = ratio_sum / ratio_count;
    table.push_back(std::move(row));
  }
  return table;
}

std::string to_csv(const std::vector<GroupRow>& table) {
  std::ostringstream out;
  out << "Group,Cases,Optimal Rate,Success Rate,Feasible Rate,Avg Time Ratio,Avg Cost Ratio,Parallel Ratio\n";
  for (const auto& row : table) {
    const auto& r = row.report;
    out << row.key << ',' << r.n << ',' << format_decimal(r.optimal_rate * 100, 1) << ','
        << format_decimal(r.success_rate * 100, 1) << ',' << format_decimal(r.feasible_rate * 100, 1) << ','
        << format_decimal(r.avg_time_ratio, 3) << ',' << format_decimal(r.avg_cost_ratio, 3) << ','
        << (row.mean_parallel_ratio ? format_decimal(*row.mean_parallel_ratio, 3) : std::string()) << '\n';
  }
  return out.str();
}

}  // namespace parplan

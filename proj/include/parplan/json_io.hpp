#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "parplan/core.hpp"

namespace parplan {

// Insertion-ordered so serialized field order is stable:
// rules[id, source, target, time, cost], initial_source, target.
using Json = nlohmann::ordered_json;

Json to_json(const TaskGraph& graph);
Json to_json(const Plan& plan);
Json to_json(const PlanValue& value);

// Strict decoders. Shape and type problems raise kSchemaMismatch naming the
// offending element and field; graph invariant failures raise
// kInvariantViolation. Rule and plan targets may be a string or a
// one-element list. A missing rule id defaults to the rule's position.
TaskGraph graph_from_json(const Json& j);
Plan plan_from_json(const Json& j);

// Pretty form (4-space indent) used inside prompts; compact form for JSONL.
std::string pretty_json(const TaskGraph& graph);
std::string compact_json(const TaskGraph& graph);
std::string compact_json(const Plan& plan);

// Rewrites the common non-JSON habits of model output into JSON:
// single-quoted strings become double-quoted, trailing commas before a
// closing bracket are dropped. Text inside double-quoted strings is kept.
std::string repair_json(std::string_view text);

// Finds the last top-level, well-formed JSON value of the given kind ('['
// for arrays, '{' for objects) anywhere in free text, fenced or not.
// Candidates are repaired with repair_json before parsing.
std::optional<Json> find_last_json(std::string_view text, char open);

}  // namespace parplan

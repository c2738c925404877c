#include "parplan/json_io.hpp"

#include <cctype>
#include <cmath>

namespace parplan {
namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kSchemaMismatch, where + ": " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

NodeId node_from_json(const Json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "node label must be a string");
  const auto& s = j.get_ref<const std::string&>();
  if (!NodeId::is_valid(s)) schema_error(where, "bad node label '" + s + "'");
  return NodeId(s);
}

std::vector<NodeId> node_list(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected a list of node labels");
  std::vector<NodeId> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(node_from_json(e, where));
  return out;
}

NodeId single_target(const Json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 1) schema_error(where, "target list must hold exactly one node");
    return node_from_json(j.front(), where);
  }
  return node_from_json(j, where);
}

std::int64_t integer_field(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  schema_error(where, "expected an integer");
}

Json node_array(const std::vector<NodeId>& nodes) {
  Json out = Json::array();
  for (const auto& n : nodes) out.push_back(n.str());
  return out;
}

}  // namespace

Json to_json(const TaskGraph& graph) {
  Json rules = Json::array();
  for (const auto& r : graph.rules()) {
    Json jr;
    jr["id"] = r.id();
    jr["source"] = node_array(r.sources());
    jr["target"] = Json::array({r.target().str()});
    jr["time"] = r.time();
    jr["cost"] = r.cost();
    rules.push_back(std::move(jr));
  }
  Json j;
  j["rules"] = std::move(rules);
  j["initial_source"] = node_array(graph.initial_sources());
  j["target"] = graph.target().str();
  return j;
}

Json to_json(const Plan& plan) {
  Json out = Json::array();
  for (const auto& p : plan.subtasks) {
    Json jp;
    jp["name"] = p.name;
    jp["source"] = node_array(p.sources);
    jp["target"] = Json::array({p.target.str()});
    jp["dependencies"] = p.dependencies;
    out.push_back(std::move(jp));
  }
  return out;
}

Json to_json(const PlanValue& value) {
  Json j;
  j["makespan"] = value.makespan;
  j["cost"] = value.cost;
  return j;
}

TaskGraph graph_from_json(const Json& j) {
  if (!j.is_object()) schema_error("graph", "expected a JSON object");
  const Json& jrules = require(j, "rules", "graph");
  if (!jrules.is_array()) schema_error("graph", "'rules' must be a list");

  std::vector<Rule> rules;
  rules.reserve(jrules.size());
  for (std::size_t i = 0; i < jrules.size(); ++i) {
    const std::string where = "rules[" + std::to_string(i) + "]";
    const Json& jr = jrules[i];
    if (!jr.is_object()) schema_error(where, "expected an object");
    std::uint32_t id = static_cast<std::uint32_t>(i);
    if (auto it = jr.find("id"); it != jr.end()) {
      auto v = integer_field(*it, where + ".id");
      if (v < 0 || v > 0xffffffffLL) schema_error(where + ".id", "out of range");
      id = static_cast<std::uint32_t>(v);
    }
    auto sources = node_list(require(jr, "source", where), where + ".source");
    auto target = single_target(require(jr, "target", where), where + ".target");
    auto time = integer_field(require(jr, "time", where), where + ".time");
    auto cost = integer_field(require(jr, "cost", where), where + ".cost");
    rules.emplace_back(id, std::move(sources), std::move(target), time, cost);
  }
  auto initial = node_list(require(j, "initial_source", "graph"), "initial_source");
  auto target = single_target(require(j, "target", "graph"), "target");
  return TaskGraph(std::move(rules), std::move(initial), std::move(target));
}

Plan plan_from_json(const Json& j) {
  if (!j.is_array()) schema_error("plan", "expected a JSON array of subtasks");
  Plan plan;
  plan.subtasks.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "subtask[" + std::to_string(i) + "]";
    const Json& jp = j[i];
    if (!jp.is_object()) schema_error(where, "expected an object");
    const Json& name = require(jp, "name", where);
    if (!name.is_string()) schema_error(where + ".name", "expected a string");
    auto sources = node_list(require(jp, "source", where), where + ".source");
    auto target = single_target(require(jp, "target", where), where + ".target");
    const Json& deps = require(jp, "dependencies", where);
    if (!deps.is_array()) schema_error(where + ".dependencies", "expected a list of names");
    std::vector<std::string> dependencies;
    for (const auto& d : deps) {
      if (!d.is_string()) schema_error(where + ".dependencies", "expected a list of names");
      dependencies.push_back(d.get<std::string>());
    }
    plan.subtasks.push_back(SubPlan{name.get<std::string>(), std::move(sources), std::move(target),
                                    std::move(dependencies)});
  }
  return plan;
}

std::string pretty_json(const TaskGraph& graph) { return to_json(graph).dump(4); }
std::string compact_json(const TaskGraph& graph) { return to_json(graph).dump(); }
std::string compact_json(const Plan& plan) { return to_json(plan).dump(); }

std::string repair_json(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j += (text[j] == '\\') ? 2 : 1;
      j = std::min(j + 1, text.size());
      out.append(text.substr(i, j - i));
      i = j;
    } else if (c == '\'') {
      out.push_back('"');
      ++i;
      while (i < text.size() && text[i] != '\'') {
        if (text[i] == '\\' && i + 1 < text.size()) {
          if (text[i + 1] == '\'') {
            out.push_back('\'');
          } else {
            out.append(text.substr(i, 2));
          }
          i += 2;
          continue;
        }
        if (text[i] == '"') out.push_back('\\');
        out.push_back(text[i]);
        ++i;
      }
      out.push_back('"');
      ++i;
    } else if (c == ',') {
      std::size_t j = i + 1;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && (text[j] == ']' || text[j] == '}')) {
        i = j;
      } else {
        out.push_back(c);
        ++i;
      }
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

namespace {

// End offset (one past the closing bracket) of a balanced region starting
// at `start`, honoring both quote styles, or npos.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  std::size_t i = start;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != c && text[j] != '\n') j += (text[j] == '\\') ? 2 : 1;
      if (j >= text.size() || text[j] != c) return std::string_view::npos;
      i = j + 1;
      continue;
    }
    if (c == '[' || c == '{') {
      stack.push_back(c == '[' ? ']' : '}');
    } else if (c == ']' || c == '}') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
    ++i;
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<Json> find_last_json(std::string_view text, char open) {
  std::optional<Json> last;
  std::size_t i = 0;
  while ((i = text.find(open, i)) != std::string_view::npos) {
    auto end = balanced_end(text, i);
    if (end != std::string_view::npos) {
      Json parsed = Json::parse(repair_json(text.substr(i, end - i)), nullptr, false);
      if (!parsed.is_discarded()) {
        last = std::move(parsed);
        i = end;
        continue;
      }
    }
    ++i;
  }
  return last;
}

}  // namespace parplan

#include "parplan/prompts.hpp"

#include "parplan/error.hpp"

namespace parplan::assets {
extern const std::string_view k_graph_planning;
extern const std::string_view k_query_planning;
extern const std::string_view k_extract_graph;
extern const std::string_view k_generate_query;
extern const std::string_view k_graph_planning_example;
extern const std::string_view k_query_example;
extern const std::string_view k_query_example_plan;
}  // namespace parplan::assets

namespace parplan {
namespace {

// Returns the placeholder name if `body[pos]` opens one, else empty.
std::string_view placeholder_at(std::string_view body, std::size_t pos) {
  if (body[pos] != '{') return {};
  std::size_t end = pos + 1;
  while (end < body.size() && ((body[end] >= 'a' && body[end] <= 'z') || body[end] == '_')) ++end;
  if (end == pos + 1 || end >= body.size() || body[end] != '}') return {};
  return body.substr(pos + 1, end - pos - 1);
}

}  // namespace

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::kGraphPlanning: return "GraphPlanning";
    case PromptKind::kQueryPlanning: return "QueryPlanning";
    case PromptKind::kExtractGraph: return "ExtractGraph";
    case PromptKind::kGenerateQuery: return "GenerateQuery";
  }
  return "?";
}

const PromptTemplate& prompt_template(PromptKind kind) {
  static const PromptTemplate kGraph{PromptKind::kGraphPlanning, assets::k_graph_planning};
  static const PromptTemplate kQuery{PromptKind::kQueryPlanning, assets::k_query_planning};
  static const PromptTemplate kExtract{PromptKind::kExtractGraph, assets::k_extract_graph};
  static const PromptTemplate kGenerate{PromptKind::kGenerateQuery, assets::k_generate_query};
  switch (kind) {
    case PromptKind::kGraphPlanning: return kGraph;
    case PromptKind::kQueryPlanning: return kQuery;
    case PromptKind::kExtractGraph: return kExtract;
    case PromptKind::kGenerateQuery: return kGenerate;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown prompt kind");
}

std::string_view graph_planning_example() { return assets::k_graph_planning_example; }
std::string_view query_example() { return assets::k_query_example; }
std::string_view query_example_plan() { return assets::k_query_example_plan; }

std::set<std::string> placeholders(std::string_view body) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    auto name = placeholder_at(body, i);
    if (!name.empty()) out.emplace(name);
  }
  return out;
}

std::string render_prompt(const PromptTemplate& tpl, const Bindings& bindings) {
  const std::string_view body = tpl.body;
  std::string out;
  out.reserve(body.size() + 1024);
  std::size_t i = 0;
  while (i < body.size()) {
    auto name = placeholder_at(body, i);
    if (name.empty()) {
      out.push_back(body[i++]);
      continue;
    }
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(ErrorCode::kMissingBinding,
                  std::string(to_string(tpl.kind)) + " needs a binding for {" + std::string(name) + "}");
    }
    out += it->second;
    i += name.size() + 2;
  }
  return out;
}

Bindings standard_bindings(PromptKind kind, std::string task) {
  Bindings b;
  b["task"] = std::move(task);
  if (kind == PromptKind::kGraphPlanning) {
    b["graph_planning_example"] = std::string(graph_planning_example());
  } else {
    b["query_example"] = std::string(query_example());
    b["query_example_plan"] = std::string(query_example_plan());
  }
  return b;
}

}  // namespace parplan

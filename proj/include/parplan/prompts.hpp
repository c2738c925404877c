#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

namespace parplan {

enum class PromptKind { kGraphPlanning, kQueryPlanning, kExtractGraph, kGenerateQuery };

std::string_view to_string(PromptKind kind);

struct PromptTemplate {
  PromptKind kind;
  std::string_view body;  // byte-identical to the checked-in asset
};

const PromptTemplate& prompt_template(PromptKind kind);

// Few-shot material bundled with the templates.
std::string_view graph_planning_example();
std::string_view query_example();
std::string_view query_example_plan();

using Bindings = std::map<std::string, std::string, std::less<>>;

// Names of the {placeholder}s in a body ([a-z_]+ between braces).
std::set<std::string> placeholders(std::string_view body);

// Single-pass substitution; bound text is never rescanned. Throws
// kMissingBinding for any placeholder without a binding.
std::string render_prompt(const PromptTemplate& tpl, const Bindings& bindings);

// Bindings for `kind` with the bundled examples filled in and {task} set.
Bindings standard_bindings(PromptKind kind, std::string task);

}  // namespace parplan

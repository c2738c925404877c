#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "parplan/graphgen.hpp"
#include "parplan/json_io.hpp"
#include "parplan/solver.hpp"

namespace parplan {

// One configuration row: a generator template (its seed is ignored) and
// how many instances to draw from it.
struct DatasetRow {
  GenConfig config;
  std::size_t samples = 0;
};

using DatasetSpec = std::vector<DatasetRow>;

// Built-in benchmark configurations: 6 training rows of 2,000 and 12
// test rows (100 per linear row, 1,000 per uniform row).
DatasetSpec training_spec();
DatasetSpec testing_spec();

// Accepts a preset name ("train" | "test"), a list of rows, or an object
// {"preset": ...} / {"rows": [...]}. Row fields: node_count, structure,
// edge_relation, samples, and optionally max_groups_per_node,
// time_range [lo, hi], fixed_cost. Throws kInvalidArgument.
DatasetSpec spec_from_json(const Json& j);
Json spec_to_json(const DatasetSpec& spec);

// Instance i of row r draws from Rng(derive_seed(derive_seed(master, r), i)),
// so any subset can be regenerated independently of the others.
std::uint64_t instance_seed(std::uint64_t master_seed, std::size_t row, std::size_t index);

// Generates every row (no labels). Output order is row-major and does not
// depend on `jobs`. Failures are rethrown with the row and sample attached.
std::vector<GeneratedGraph> generate_batch(const DatasetSpec& spec, std::uint64_t master_seed, unsigned jobs = 0);

struct LabeledPlan {
  Plan plan;
  PlanValue value;
  std::vector<std::uint32_t> rule_ids;
  bool exact = false;

  Json to_json() const;
};

struct LabeledInstance {
  std::size_t index = 0;  // position in the whole dataset
  TaskGraph graph;
  LabeledPlan optimal;
  std::optional<LabeledPlan> second_best;
  InstanceMeta meta;

  Json to_json() const;
};

struct BuildOptions {
  unsigned jobs = 0;  // 0: available parallelism
  SolveOptions solve;
};

std::vector<LabeledInstance> build_dataset(const DatasetSpec& spec, std::uint64_t master_seed,
                                           const BuildOptions& options = {});

enum class SftMode { kOpt, kOptFeas };

// Training records. "input" is the compact graph JSON (the same bytes as the
// graph in instances.jsonl), "output"/"chosen"/"rejected" compact plan
// JSON, and "prompt" the full planning prompt built around the graph.
std::vector<Json> emit_sft(const std::vector<LabeledInstance>& instances, SftMode mode);

struct DpoRecords {
  std::vector<Json> records;
  std::size_t skipped = 0;  // instances without a second-best plan
};
DpoRecords emit_dpo(const std::vector<LabeledInstance>& instances);

enum class Emit { kSftOpt, kSftMixed, kDpo };
Emit parse_emit(std::string_view s);  // sft-opt | sft-mixed | dpo
std::string_view to_string(Emit e);

// Writes instances.jsonl, the requested training files and manifest.json
// (spec, seed, counts and SHA-256 of each file) atomically. Returns the
// manifest.
Json write_dataset(const std::filesystem::path& out_dir, const DatasetSpec& spec, std::uint64_t master_seed,
                   const std::vector<LabeledInstance>& instances, const std::set<Emit>& emits);

}  // namespace parplan

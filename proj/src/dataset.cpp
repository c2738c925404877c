#include "parplan/dataset.hpp"

#include <sstream>

#include "parplan/metrics.hpp"
#include "parplan/prompts.hpp"
#include "parplan/util.hpp"

namespace parplan {
namespace {

DatasetRow row(std::uint32_t n, Structure s, EdgeRelation e, std::size_t samples) {
  DatasetRow r;
  r.config.node_count = n;
  r.config.structure = s;
  r.config.edge_relation = e;
  r.samples = samples;
  return r;
}

std::string row_label(const DatasetRow& r, std::size_t index) {
  std::ostringstream out;
  out << "row " << index << " (n=" << r.config.node_count << ", " << to_string(r.config.structure) << ", "
      << to_string(r.config.edge_relation) << ")";
  return out.str();
}

LabeledPlan label(const SolvedPlan& s) { return LabeledPlan{s.plan, s.value, s.rule_ids, s.exact}; }

}  // namespace

DatasetSpec training_spec() {
  using S = Structure;
  using E = EdgeRelation;
  return {row(10, S::kRandom, E::kUniform, 2000), row(10, S::kTreeBased, E::kLinear, 2000),
          row(30, S::kRandom, E::kUniform, 2000), row(30, S::kTreeBased, E::kLinear, 2000),
          row(50, S::kRandom, E::kLinear, 2000),  row(50, S::kTreeBased, E::kLinear, 2000)};
}

DatasetSpec testing_spec() {
  using S = Structure;
  using E = EdgeRelation;
  DatasetSpec spec;
  for (std::uint32_t n : {10u, 20u, 30u, 40u, 50u}) {
    spec.push_back(row(n, S::kRandom, E::kLinear, 100));
    spec.push_back(row(n, S::kTreeBased, E::kLinear, 100));
    if (n == 10 || n == 30) spec.push_back(row(n, S::kRandom, E::kUniform, 1000));
  }
  return spec;
}

DatasetSpec spec_from_json(const Json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "train" || name == "training") return training_spec();
    if (name == "test" || name == "testing") return testing_spec();
    throw Error(ErrorCode::kInvalidArgument, "unknown dataset preset '" + name + "'");
  }
  if (j.is_object()) {
    if (j.contains("preset")) return spec_from_json(j["preset"]);
    if (j.contains("rows")) return spec_from_json(j["rows"]);
    throw Error(ErrorCode::kInvalidArgument, "dataset spec object needs \"preset\" or \"rows\"");
  }
  if (!j.is_array()) throw Error(ErrorCode::kInvalidArgument, "dataset spec must be a preset name, object or list");
  static const std::set<std::string> kKeys{"node_count", "structure",  "edge_relation", "samples",
                                           "max_groups_per_node", "time_range", "fixed_cost"};
  DatasetSpec spec;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& r = j[i];
    const std::string where = "rows[" + std::to_string(i) + "]";
    if (!r.is_object()) throw Error(ErrorCode::kInvalidArgument, where + " must be an object");
    for (const auto& [key, value] : r.items()) {
      if (!kKeys.count(key)) throw Error(ErrorCode::kInvalidArgument, where + ": unknown key '" + key + "'");
    }
    DatasetRow out;
    try {
      out.config.node_count = r.at("node_count").get<std::uint32_t>();
      out.config.structure = parse_structure(r.at("structure").get<std::string>());
      out.config.edge_relation = parse_edge_relation(r.value("edge_relation", std::string("linear")));
      out.samples = r.at("samples").get<std::size_t>();
      out.config.max_groups_per_node = r.value("max_groups_per_node", out.config.max_groups_per_node);
      if (r.contains("time_range")) {
        const auto& t = r["time_range"];
        if (!t.is_array() || t.size() != 2) throw Error(ErrorCode::kInvalidArgument, "time_range must be [lo, hi]");
        out.config.time_range = {t[0].get<std::int64_t>(), t[1].get<std::int64_t>()};
      }
      out.config.fixed_cost = r.value("fixed_cost", out.config.fixed_cost);
      out.config.validate();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidArgument, where + ": " + e.what());
    }
    spec.push_back(out);
  }
  return spec;
}

Json spec_to_json(const DatasetSpec& spec) {
  Json rows = Json::array();
  for (const auto& r : spec) {
    rows.push_back({{"node_count", r.config.node_count},
                    {"structure", std::string(to_string(r.config.structure))},
                    {"edge_relation", std::string(to_string(r.config.edge_relation))},
                    {"samples", r.samples},
                    {"max_groups_per_node", r.config.max_groups_per_node},
                    {"time_range", {r.config.time_range.lo, r.config.time_range.hi}},
                    {"fixed_cost", r.config.fixed_cost}});
  }
  return rows;
}

std::uint64_t instance_seed(std::uint64_t master_seed, std::size_t row, std::size_t index) {
  return derive_seed(derive_seed(master_seed, row), index);
}

namespace {

struct Slot {
  std::size_t row;
  std::size_t sample;
};

std::vector<Slot> slots(const DatasetSpec& spec) {
  std::vector<Slot> out;
  for (std::size_t r = 0; r < spec.size(); ++r) {
    for (std::size_t i = 0; i < spec[r].samples; ++i) out.push_back({r, i});
  }
  return out;
}

GeneratedGraph generate_slot(const DatasetSpec& spec, std::uint64_t master_seed, const Slot& s) {
  GenConfig cfg = spec[s.row].config;
  cfg.seed = instance_seed(master_seed, s.row, s.sample);
  try {
    return generate_graph(cfg);
  } catch (const Error& e) {
    throw Error(e.code(), row_label(spec[s.row], s.row) + ", sample " + std::to_string(s.sample) + ": " + e.what());
  }
}

}  // namespace

std::vector<GeneratedGraph> generate_batch(const DatasetSpec& spec, std::uint64_t master_seed, unsigned jobs) {
  for (std::size_t r = 0; r < spec.size(); ++r) {
    try {
      spec[r].config.validate();
    } catch (const Error& e) {
      throw Error(e.code(), row_label(spec[r], r) + ": " + e.what());
    }
  }
  const auto all = slots(spec);
  std::vector<std::optional<GeneratedGraph>> out(all.size());
  parallel_for(all.size(), jobs, [&](std::size_t i) { out[i] = generate_slot(spec, master_seed, all[i]); });
  std::vector<GeneratedGraph> result;
  result.reserve(out.size());
  for (auto& g : out) result.push_back(std::move(*g));
  return result;
}

Json LabeledPlan::to_json() const {
  return Json{{"plan", parplan::to_json(plan)},
              {"makespan", value.makespan},
              {"cost", value.cost},
              {"rule_ids", rule_ids},
              {"exact", exact}};
}

Json LabeledInstance::to_json() const {
  Json j;
  j["id"] = std::to_string(index);
  j["graph"] = parplan::to_json(graph);
  j["optimal"] = optimal.to_json();
  j["second_best"] = second_best ? second_best->to_json() : Json();
  j["meta"] = parplan::to_json(meta);
  return j;
}

std::vector<LabeledInstance> build_dataset(const DatasetSpec& spec, std::uint64_t master_seed,
                                           const BuildOptions& options) {
  for (std::size_t r = 0; r < spec.size(); ++r) {
    try {
      spec[r].config.validate();
    } catch (const Error& e) {
      throw Error(e.code(), row_label(spec[r], r) + ": " + e.what());
    }
  }
  const auto all = slots(spec);
  std::vector<std::optional<LabeledInstance>> out(all.size());
  parallel_for(all.size(), options.jobs, [&](std::size_t i) {
    auto g = generate_slot(spec, master_seed, all[i]);
    try {
      auto opt = optimal_plan(g.graph, options.solve);
      auto second = second_best_plan(g.graph, opt, options.solve);
      LabeledInstance inst{i, std::move(g.graph), label(opt), std::nullopt, g.meta};
      if (second) inst.second_best = label(*second);
      out[i] = std::move(inst);
    } catch (const Error& e) {
      throw Error(e.code(), row_label(spec[all[i].row], all[i].row) + ", sample " + std::to_string(all[i].sample) +
                                ": " + e.what());
    }
  });
  std::vector<LabeledInstance> result;
  result.reserve(out.size());
  for (auto& inst : out) result.push_back(std::move(*inst));
  return result;
}

namespace {

std::string planning_prompt(const TaskGraph& graph) {
  return render_prompt(prompt_template(PromptKind::kGraphPlanning),
                       standard_bindings(PromptKind::kGraphPlanning, pretty_json(graph)));
}

// Records for one instance; `prompt` and `input` are shared between them.
void append_sft(const LabeledInstance& inst, SftMode mode, std::vector<Json>& out) {
  const std::string input = compact_json(inst.graph);
  const std::string prompt = planning_prompt(inst.graph);
  out.push_back(Json{{"id", std::to_string(inst.index)},
                     {"label", "optimal"},
                     {"input", input},
                     {"output", compact_json(inst.optimal.plan)},
                     {"prompt", prompt}});
  if (mode == SftMode::kOptFeas && inst.second_best) {
    out.push_back(Json{{"id", std::to_string(inst.index)},
                       {"label", "second_best"},
                       {"input", input},
                       {"output", compact_json(inst.second_best->plan)},
                       {"prompt", prompt}});
  }
}

std::optional<Json> dpo_record(const LabeledInstance& inst) {
  if (!inst.second_best) return std::nullopt;
  return Json{{"id", std::to_string(inst.index)},
              {"input", compact_json(inst.graph)},
              {"chosen", compact_json(inst.optimal.plan)},
              {"rejected", compact_json(inst.second_best->plan)},
              {"prompt", planning_prompt(inst.graph)}};
}

}  // namespace

std::vector<Json> emit_sft(const std::vector<LabeledInstance>& instances, SftMode mode) {
  std::vector<Json> records;
  records.reserve(instances.size() * (mode == SftMode::kOpt ? 1 : 2));
  for (const auto& inst : instances) append_sft(inst, mode, records);
  return records;
}

DpoRecords emit_dpo(const std::vector<LabeledInstance>& instances) {
  DpoRecords out;
  for (const auto& inst : instances) {
    if (auto r = dpo_record(inst)) {
      out.records.push_back(std::move(*r));
    } else {
      ++out.skipped;
    }
  }
  return out;
}

Emit parse_emit(std::string_view s) {
  if (s == "sft-opt") return Emit::kSftOpt;
  if (s == "sft-mixed") return Emit::kSftMixed;
  if (s == "dpo") return Emit::kDpo;
  throw Error(ErrorCode::kInvalidArgument, "unknown emit kind '" + std::string(s) + "'");
}

std::string_view to_string(Emit e) {
  switch (e) {
    case Emit::kSftOpt: return "sft-opt";
    case Emit::kSftMixed: return "sft-mixed";
    case Emit::kDpo: return "dpo";
  }
  return "?";
}

Json write_dataset(const std::filesystem::path& out_dir, const DatasetSpec& spec, std::uint64_t master_seed,
                   const std::vector<LabeledInstance>& instances, const std::set<Emit>& emits) {
  Json manifest;
  manifest["spec"] = spec_to_json(spec);
  manifest["master_seed"] = master_seed;
  Json counts;
  Json files = Json::object();

  auto put = [&](const std::string& name, const std::string& content, std::size_t records) {
    write_file_atomic(out_dir / name, content);
    files[name] = {{"records", records}, {"sha256", sha256_hex(content)}};
  };

  // Serialized one instance at a time so large sets never hold every
  // record as a JSON tree.
  std::string text;
  std::size_t with_second = 0;
  for (const auto& inst : instances) {
    text += inst.to_json().dump() + "\n";
    if (inst.second_best) ++with_second;
  }
  put("instances.jsonl", text, instances.size());
  counts["instances"] = instances.size();
  counts["with_second_best"] = with_second;

  auto sft_file = [&](SftMode mode, const char* name, const char* key) {
    std::string body;
    std::size_t n = 0;
    std::vector<Json> records;
    for (const auto& inst : instances) {
      records.clear();
      append_sft(inst, mode, records);
      for (const auto& r : records) body += r.dump() + "\n";
      n += records.size();
    }
    put(name, body, n);
    counts[key] = n;
  };
  if (emits.count(Emit::kSftOpt)) sft_file(SftMode::kOpt, "sft_opt.jsonl", "sft_opt");
  if (emits.count(Emit::kSftMixed)) sft_file(SftMode::kOptFeas, "sft_mixed.jsonl", "sft_mixed");
  if (emits.count(Emit::kDpo)) {
    std::string body;
    std::size_t n = 0, skipped = 0;
    for (const auto& inst : instances) {
      if (auto r = dpo_record(inst)) {
        body += r->dump() + "\n";
        ++n;
      } else {
        ++skipped;
      }
    }
    put("dpo.jsonl", body, n);
    counts["dpo"] = n;
    counts["dpo_skipped"] = skipped;
  }
  manifest["counts"] = std::move(counts);
  manifest["files"] = std::move(files);
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace parplan

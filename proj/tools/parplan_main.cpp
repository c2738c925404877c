// parplan: generate, solve, validate and score parallel-planning instances;
// build training datasets; run model evaluations.
//
// Exit status: 0 ok, 1 some items failed, 2 usage or configuration error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "parplan/dataset.hpp"
#include "parplan/evaluator.hpp"
#include "parplan/harness.hpp"
#include "parplan/json_io.hpp"
#include "parplan/metrics.hpp"
#include "parplan/solver.hpp"
#include "parplan/util.hpp"

namespace fs = std::filesystem;
using namespace parplan;

namespace {

constexpr int kOk = 0;
constexpr int kItemFailures = 1;
constexpr int kUsage = 2;

// Raised while reading inputs and configs; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
auto load(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

TaskGraph load_graph(const std::string& path) {
  return load("--graph " + path, [&] { return graph_from_json(read_json_file(path)); });
}

ModelEndpointConfig load_endpoint(const std::string& path) {
  return load("--endpoint " + path, [&] { return ModelEndpointConfig::from_json(read_json_file(path)); });
}

Json verdict_json(const PlanVerdict& v, const PlanValue& opt) {
  Json j;
  j["status"] = std::string(to_string(v.status));
  Json errors = Json::array();
  for (auto e : v.errors) errors.push_back(std::string(to_string(e)));
  j["errors"] = std::move(errors);
  if (v.schedule) {
    j["makespan"] = v.schedule->makespan;
    j["cost"] = v.schedule->total_cost;
    j["duration_sum"] = v.schedule->duration_sum;
    Json ends = Json::object();
    for (const auto& [name, end] : v.schedule->end_times) ends[name] = end;
    j["end_times"] = std::move(ends);
  }
  j["opt"] = to_json(opt);
  j["redundant_subtasks"] = v.redundant_subtasks;
  return j;
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    write_file_atomic(out, content);
  }
}

Json solved_json(const SolvedPlan& s) {
  return Json{{"plan", to_json(s.plan)},
              {"makespan", s.value.makespan},
              {"cost", s.value.cost},
              {"rule_ids", s.rule_ids},
              {"exact", s.exact}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel planning over task graphs"};
  app.require_subcommand(1);
  unsigned jobs = default_jobs();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate task graphs from a configuration file");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "JSON: {\"seed\", \"rows\" | \"preset\"}")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output JSONL, one graph per line")->required();
  gen->add_option("--seed", gen_seed, "Overrides the config seed");
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // solve
  auto* solve = app.add_subcommand("solve", "Optimal (and second-best) plan for one graph");
  std::string solve_graph, solve_out;
  bool solve_second = false;
  SolveOptions solve_opts;
  solve->add_option("--graph", solve_graph, "Task graph JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", solve_out, "Plan JSON; <out>.meta.json gets the values")->required();
  solve->add_flag("--second-best", solve_second, "Also compute the second-best plan");
  solve->add_option("--exact-threshold", solve_opts.exact_threshold, "Exhaustive search up to this many rules");
  solve->add_option("--budget", solve_opts.search_budget, "Search-node budget above the threshold");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a plan against a graph");
  std::string val_graph, val_plan, val_out;
  validate->add_option("--graph", val_graph, "Task graph JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--plan", val_plan, "Plan JSON (array of subtasks)")->required()->check(CLI::ExistingFile);
  validate->add_option("--out", val_out, "Verdict JSON (default: stdout)");

  // score
  auto* score = app.add_subcommand("score", "Aggregate a verdicts file into a report table");
  std::string score_verdicts, score_group = "node_count", score_out;
  std::size_t bucket_width = 10;
  score->add_option("--verdicts", score_verdicts, "verdicts.jsonl")->required()->check(CLI::ExistingFile);
  score->add_option("--group-by", score_group, "node_count | edge_bucket | structure | node_structure")
      ->check(CLI::IsMember({"node_count", "edge_bucket", "structure", "node_structure"}));
  score->add_option("--out", score_out, "Report CSV")->required();
  score->add_option("--edge-bucket-width", bucket_width, "Width of edge-count buckets")->check(CLI::PositiveNumber);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Build a labeled dataset and training files");
  std::string ds_spec, ds_out;
  std::uint64_t ds_seed = 0;
  std::vector<std::string> ds_emit;
  dataset->add_option("--spec", ds_spec, "Spec JSON: preset name, rows list or {\"rows\"|\"preset\"}")
      ->required()
      ->check(CLI::ExistingFile);
  dataset->add_option("--seed", ds_seed, "Master seed")->required();
  dataset->add_option("--out-dir", ds_out, "Output directory")->required();
  dataset->add_option("--emit", ds_emit, "sft-opt | sft-mixed | dpo (repeatable; default all)")
      ->check(CLI::IsMember({"sft-opt", "sft-mixed", "dpo"}));
  dataset->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model endpoint on instances");
  std::string ev_instances, ev_pipeline, ev_endpoint, ev_out;
  eval->add_option("--instances", ev_instances, "Instances JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--pipeline", ev_pipeline, "plan-direct | plan-on-graph | extract-then-plan")
      ->required()
      ->check(CLI::IsMember({"plan-direct", "plan-on-graph", "extract-then-plan"}));
  eval->add_option("--endpoint", ev_endpoint, "Endpoint config JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--out-dir", ev_out, "Run artifact directory")->required();

  // genquery
  auto* genquery = app.add_subcommand("genquery", "Write a natural-language query for a graph");
  std::string gq_graph, gq_endpoint, gq_out;
  int gq_rounds = 3;
  genquery->add_option("--graph", gq_graph, "Task graph JSON")->required()->check(CLI::ExistingFile);
  genquery->add_option("--endpoint", gq_endpoint, "Endpoint config JSON")->required()->check(CLI::ExistingFile);
  genquery->add_option("--rounds", gq_rounds, "Maximum self-correction rounds")->check(CLI::PositiveNumber);
  genquery->add_option("--out", gq_out, "Result JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      auto config = load("--config " + gen_config, [&] { return read_json_file(gen_config); });
      auto spec = load("--config " + gen_config, [&] { return spec_from_json(config); });
      std::uint64_t seed = gen_seed ? *gen_seed : load("--config " + gen_config, [&] {
        return config.is_object() ? config.value("seed", std::uint64_t{0}) : std::uint64_t{0};
      });
      auto graphs = generate_batch(spec, seed, jobs);
      std::string lines;
      Json seeds = Json::array();
      std::size_t line = 0;
      for (std::size_t r = 0; r < spec.size(); ++r) {
        for (std::size_t i = 0; i < spec[r].samples; ++i, ++line) {
          lines += to_json(graphs[line].graph).dump() + "\n";
          seeds.push_back({{"line", line + 1}, {"row", r}, {"sample", i}, {"meta", to_json(graphs[line].meta)}});
        }
      }
      write_file_atomic(gen_out, lines);
      Json manifest{{"master_seed", seed},
                    {"spec", spec_to_json(spec)},
                    {"count", graphs.size()},
                    {"sha256", sha256_hex(lines)},
                    {"instances", std::move(seeds)}};
      write_file_atomic(gen_out + ".manifest.json", manifest.dump(2) + "\n");
      std::cerr << "generated " << graphs.size() << " graphs -> " << gen_out << "\n";
      return kOk;
    }

    if (*solve) {
      auto graph = load_graph(solve_graph);
      auto opt = optimal_plan(graph, solve_opts);
      Json meta{{"makespan", opt.value.makespan}, {"cost", opt.value.cost}, {"exact", opt.exact},
                {"rule_ids", opt.rule_ids}};
      if (solve_second) {
        auto second = second_best_plan(graph, opt, solve_opts);
        meta["second_best"] = second ? solved_json(*second) : Json();
      }
      write_file_atomic(solve_out, to_json(opt.plan).dump(4) + "\n");
      write_file_atomic(solve_out + ".meta.json", meta.dump(2) + "\n");
      std::cerr << "makespan " << opt.value.makespan << ", cost " << opt.value.cost << "\n";
      return kOk;
    }

    if (*validate) {
      auto graph = load_graph(val_graph);
      auto plan = load("--plan " + val_plan, [&] { return plan_from_json(read_json_file(val_plan)); });
      auto opt = optimal_plan(graph).value;
      auto verdict = validate_plan(graph, plan, opt);
      emit(val_out, verdict_json(verdict, opt).dump(2) + "\n");
      std::cerr << to_string(verdict.status) << "\n";
      return verdict.succeeded() ? kOk : kItemFailures;
    }

    if (*score) {
      auto key = parse_group_key(score_group);
      auto rows = load("--verdicts " + score_verdicts, [&] {
        std::vector<MetricRow> out;
        for (const auto& j : read_jsonl(score_verdicts)) out.push_back(metric_row_from_json(j));
        return out;
      });
      auto table = aggregate_by(key, rows, bucket_width);
      write_file_atomic(score_out, to_csv(table));
      std::cerr << "scored " << rows.size() << " verdicts in " << table.size() << " groups\n";
      return kOk;
    }

    if (*dataset) {
      auto spec = load("--spec " + ds_spec, [&] { return spec_from_json(read_json_file(ds_spec)); });
      std::set<Emit> emits;
      for (const auto& e : ds_emit) emits.insert(parse_emit(e));
      if (emits.empty()) emits = {Emit::kSftOpt, Emit::kSftMixed, Emit::kDpo};
      BuildOptions opts;
      opts.jobs = jobs;
      auto instances = build_dataset(spec, ds_seed, opts);
      auto manifest = write_dataset(ds_out, spec, ds_seed, instances, emits);
      std::cerr << "dataset: " << manifest["counts"].dump() << "\n";
      return kOk;
    }

    if (*eval) {
      auto config = load_endpoint(ev_endpoint);
      auto pipeline = parse_pipeline(ev_pipeline);
      auto instances = load("--instances " + ev_instances, [&] {
        std::vector<EvalInstance> out;
        auto lines = read_jsonl(ev_instances);
        for (std::size_t i = 0; i < lines.size(); ++i) {
          out.push_back(EvalInstance::from_json(lines[i], std::to_string(i)));
        }
        return out;
      });
      HttpChatClient client(config);
      auto run = run_eval(instances, pipeline, client, config, fs::path(ev_out));
      std::cerr << "optimal " << format_decimal(run.report.optimal_rate * 100, 1) << "%, success "
                << format_decimal(run.report.success_rate * 100, 1) << "%, failed " << run.failed << "/"
                << run.cases.size() << "\n";
      return run.failed == 0 ? kOk : kItemFailures;
    }

    if (*genquery) {
      auto graph = load_graph(gq_graph);
      auto config = load_endpoint(gq_endpoint);
      HttpChatClient client(config);
      try {
        auto result = generate_query(graph, client, config, gq_rounds);
        emit(gq_out, result.to_json().dump(2) + "\n");
        return kOk;
      } catch (const AllRoundsFailed& e) {
        Json j{{"error", e.what()}};
        j["best"] = e.best() ? e.best()->to_json() : Json();
        Json rounds = Json::array();
        for (const auto& r : e.rounds()) rounds.push_back(r.to_json());
        j["rounds"] = std::move(rounds);
        emit(gq_out, j.dump(2) + "\n");
        std::cerr << e.what() << "\n";
        return kItemFailures;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kUsage : kItemFailures;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kItemFailures;
  }
  return kUsage;
}

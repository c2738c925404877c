// JSON text crosses the boundary; the Python package turns it into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parplan/dataset.hpp"
#include "parplan/evaluator.hpp"
#include "parplan/graphgen.hpp"
#include "parplan/harness.hpp"
#include "parplan/json_io.hpp"
#include "parplan/metrics.hpp"
#include "parplan/prompts.hpp"
#include "parplan/solver.hpp"

namespace py = pybind11;
using namespace parplan;

namespace {

TaskGraph graph_of(const std::string& text) { return graph_from_json(Json::parse(text)); }

Json solved(const SolvedPlan& s) {
  return Json{{"plan", to_json(s.plan)},
              {"makespan", s.value.makespan},
              {"cost", s.value.cost},
              {"rule_ids", s.rule_ids},
              {"exact", s.exact}};
}

PromptKind prompt_kind(const std::string& name) {
  if (name == "graph_planning") return PromptKind::kGraphPlanning;
  if (name == "query_planning") return PromptKind::kQueryPlanning;
  if (name == "extract_graph") return PromptKind::kExtractGraph;
  if (name == "generate_query") return PromptKind::kGenerateQuery;
  throw Error(ErrorCode::kInvalidArgument, "unknown prompt kind '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Task-graph generation, optimal parallel planning and plan evaluation";

  static py::exception<Error> error(m, "ParplanError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    } catch (const nlohmann::json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "generate",
      [](std::uint32_t node_count, const std::string& structure, const std::string& edge_relation,
         std::uint64_t seed) {
        GenConfig cfg;
        cfg.node_count = node_count;
        cfg.structure = parse_structure(structure);
        cfg.edge_relation = parse_edge_relation(edge_relation);
        cfg.seed = seed;
        auto g = generate_graph(cfg);
        return Json{{"graph", to_json(g.graph)}, {"meta", to_json(g.meta)}}.dump();
      },
      py::arg("node_count"), py::arg("structure") = "random", py::arg("edge_relation") = "linear",
      py::arg("seed") = 0);

  m.def(
      "solve",
      [](const std::string& graph, bool second_best) {
        auto g = graph_of(graph);
        auto opt = optimal_plan(g);
        Json out = solved(opt);
        if (second_best) {
          auto s = second_best_plan(g, opt);
          out["second_best"] = s ? solved(*s) : Json();
        }
        return out.dump();
      },
      py::arg("graph"), py::arg("second_best") = false);

  m.def(
      "brute_force",
      [](const std::string& graph, std::size_t max_rules) { return solved(brute_force_solve(graph_of(graph), max_rules)).dump(); },
      py::arg("graph"), py::arg("max_rules") = 20);

  m.def(
      "earliest_finish_times",
      [](const std::string& graph) {
        auto table = earliest_finish_times(graph_of(graph));
        Json out = Json::object();
        for (std::size_t i = 0; i < table.nodes.size(); ++i) {
          out[table.nodes[i].str()] = table.eft[i] ? Json(*table.eft[i]) : Json();
        }
        return out.dump();
      },
      py::arg("graph"));

  m.def(
      "validate",
      [](const std::string& graph, const std::string& plan) {
        auto g = graph_of(graph);
        auto p = plan_from_json(Json::parse(plan));
        auto opt = optimal_plan(g).value;
        auto v = validate_plan(g, p, opt);
        Json out{{"status", std::string(to_string(v.status))}};
        Json errors = Json::array();
        for (auto e : v.errors) errors.push_back(std::string(to_string(e)));
        out["errors"] = std::move(errors);
        if (v.schedule) {
          out["makespan"] = v.schedule->makespan;
          out["cost"] = v.schedule->total_cost;
          out["duration_sum"] = v.schedule->duration_sum;
        }
        out["opt"] = to_json(opt);
        out["redundant_subtasks"] = v.redundant_subtasks;
        return out.dump();
      },
      py::arg("graph"), py::arg("plan"));

  m.def(
      "correlation",
      [](const std::vector<double>& xs, const std::vector<double>& ys) {
        auto c = correlation_stats(xs, ys);
        return std::make_pair(c.r, c.slope);
      },
      py::arg("xs"), py::arg("ys"));

  m.def(
      "render_prompt",
      [](const std::string& kind, const std::string& task) {
        auto k = prompt_kind(kind);
        return render_prompt(prompt_template(k), standard_bindings(k, task));
      },
      py::arg("kind"), py::arg("task"));

  m.def(
      "prompt_template", [](const std::string& kind) { return std::string(prompt_template(prompt_kind(kind)).body); },
      py::arg("kind"));

  m.def(
      "pretty_graph", [](const std::string& graph) { return pretty_json(graph_of(graph)); }, py::arg("graph"));

  m.def(
      "parse_plan", [](const std::string& text) { return to_json(parse_plan(text)).dump(); }, py::arg("text"));

  m.def(
      "parse_extracted_graph", [](const std::string& text) { return to_json(parse_extracted_graph(text)).dump(); },
      py::arg("text"));

  m.def(
      "graph_similarity",
      [](const std::string& extracted, const std::string& gold) {
        auto s = graph_similarity(graph_of(extracted), graph_of(gold));
        return py::make_tuple(s.exact_match, s.similarity);
      },
      py::arg("extracted"), py::arg("gold"));

  m.def(
      "build_dataset",
      [](const std::string& spec, std::uint64_t seed, unsigned jobs) {
        BuildOptions opts;
        opts.jobs = jobs;
        std::vector<std::string> out;
        {
          py::gil_scoped_release release;
          for (const auto& inst : build_dataset(spec_from_json(Json::parse(spec)), seed, opts)) {
            out.push_back(inst.to_json().dump());
          }
        }
        return out;
      },
      py::arg("spec"), py::arg("seed"), py::arg("jobs") = 1);
}

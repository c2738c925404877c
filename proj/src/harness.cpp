#include "parplan/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>
#include <tuple>

#include "httplib.h"

#include "parplan/solver.hpp"
#include "parplan/util.hpp"

namespace parplan {
namespace {

using RuleKey = std::tuple<std::vector<NodeId>, NodeId, std::int64_t, std::int64_t>;

std::map<RuleKey, int> rule_multiset(const TaskGraph& g) {
  std::map<RuleKey, int> out;
  for (const auto& r : g.rules()) ++out[RuleKey{r.sources(), r.target(), r.time(), r.cost()}];
  return out;
}

std::vector<NodeId> sorted_initial(const TaskGraph& g) {
  auto v = g.initial_sources();
  std::sort(v.begin(), v.end());
  return v;
}

std::string describe(const RuleKey& k) {
  std::ostringstream out;
  out << '[';
  const auto& sources = std::get<0>(k);
  for (std::size_t i = 0; i < sources.size(); ++i) out << (i ? ", " : "") << sources[i].str();
  out << "] -> " << std::get<1>(k).str() << " (time " << std::get<2>(k) << ", cost " << std::get<3>(k) << ')';
  return out.str();
}

std::string join_nodes(const std::vector<NodeId>& nodes) {
  std::string out;
  for (const auto& n : nodes) out += (out.empty() ? "" : ", ") + n.str();
  return out;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

Json similarity_json(const GraphSimilarity& s) {
  return Json{{"exact_match", s.exact_match}, {"similarity", s.similarity}, {"rule_jaccard", s.rule_jaccard}};
}

PlanError parse_failure_kind(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kNoJsonFound: return PlanError::kNoJsonFound;
    case ErrorCode::kTransport: return PlanError::kTransportFailure;
    default: return PlanError::kSchemaMismatch;
  }
}

// One model round trip, recorded whether or not it succeeds.
std::string ask(ChatClient& client, EvalCase& c, std::string stage, std::string prompt) {
  Exchange ex{std::move(stage), std::move(prompt), std::nullopt, std::nullopt};
  try {
    ex.response = client.complete({{"user", ex.prompt}});
  } catch (const std::exception& e) {
    ex.error = e.what();
    c.exchanges.push_back(std::move(ex));
    throw Error(ErrorCode::kTransport, e.what());
  }
  c.exchanges.push_back(ex);
  return *ex.response;
}

EvalCase evaluate_one(const EvalInstance& inst, Pipeline pipeline, ChatClient& client,
                      const ModelEndpointConfig& config) {
  EvalCase c;
  c.id = inst.id;
  c.meta = inst.meta;
  c.opt = inst.opt ? *inst.opt : optimal_plan(inst.graph).value;

  auto fail = [&c](PlanError kind, std::string why) {
    c.verdict = PlanVerdict::failed(kind);
    c.failure = std::move(why);
  };

  const TaskGraph* plan_graph = &inst.graph;
  std::optional<TaskGraph> extracted;
  std::string plan_prompt;
  try {
    if (pipeline != Pipeline::kPlanOnGraph && !inst.query) {
      throw Error(ErrorCode::kInvalidArgument, "instance has no query text");
    }
    if (pipeline == Pipeline::kExtractThenPlan) {
      auto prompt = render_prompt(prompt_template(PromptKind::kExtractGraph),
                                  standard_bindings(PromptKind::kExtractGraph, *inst.query));
      auto response = ask(client, c, "extract", std::move(prompt));
      try {
        extracted = parse_extracted_graph(response);
      } catch (const Error& e) {
        fail(PlanError::kExtractionFailed, e.what());
        return c;
      }
      c.extraction = graph_similarity(*extracted, inst.graph, config.similarity);
      plan_graph = &*extracted;
    }
    if (pipeline == Pipeline::kPlanDirect) {
      plan_prompt = render_prompt(prompt_template(PromptKind::kQueryPlanning),
                                  standard_bindings(PromptKind::kQueryPlanning, *inst.query));
    } else {
      plan_prompt = render_prompt(prompt_template(PromptKind::kGraphPlanning),
                                  standard_bindings(PromptKind::kGraphPlanning, pretty_json(*plan_graph)));
    }
  } catch (const Error& e) {
    fail(e.code() == ErrorCode::kTransport ? PlanError::kTransportFailure : PlanError::kMalformedPlan, e.what());
    return c;
  }

  std::string response;
  try {
    response = ask(client, c, "plan", std::move(plan_prompt));
  } catch (const Error& e) {
    fail(PlanError::kTransportFailure, e.what());
    return c;
  }
  try {
    c.plan = parse_plan(response);
  } catch (const Error& e) {
    fail(parse_failure_kind(e), e.what());
    return c;
  }
  // Always scored against the gold graph, whatever was extracted.
  c.verdict = validate_plan(inst.graph, *c.plan, c.opt);
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Endpoint configuration and HTTP client

void ModelEndpointConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, "endpoint config: " + what); };
  if (base_url.empty()) bad("base_url is empty");
  if (max_concurrency < 1) bad("max_concurrency must be >= 1");
  if (retry.max_attempts < 1) bad("retry.max_attempts must be >= 1");
  if (retry.initial_backoff_s < 0 || retry.backoff_multiplier < 1) bad("backoff must be >= 0 with multiplier >= 1");
  if (!(timeout_s > 0)) bad("timeout_s must be positive");
  if (similarity.rules < 0 || similarity.initial < 0 || similarity.target < 0 ||
      std::abs(similarity.rules + similarity.initial + similarity.target - 1.0) > 1e-9) {
    bad("similarity weights must be non-negative and sum to 1");
  }
}

ModelEndpointConfig ModelEndpointConfig::from_json(const Json& j) {
  static const std::set<std::string> kKeys{"base_url",   "model",       "api_key_env", "max_concurrency",
                                           "retry",      "timeout_s",   "temperature", "similarity",
                                           "correction_message"};
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "endpoint config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw Error(ErrorCode::kInvalidArgument, "endpoint config: unknown key '" + key + "'");
  }
  ModelEndpointConfig c;
  try {
    c.base_url = j.value("base_url", c.base_url);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.temperature = j.value("temperature", c.temperature);
    c.correction_message = j.value("correction_message", c.correction_message);
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.initial_backoff_s = r.value("initial_backoff_s", c.retry.initial_backoff_s);
      c.retry.backoff_multiplier = r.value("backoff_multiplier", c.retry.backoff_multiplier);
    }
    if (j.contains("similarity")) {
      const auto& s = j["similarity"];
      c.similarity.rules = s.value("rules", c.similarity.rules);
      c.similarity.initial = s.value("initial", c.similarity.initial);
      c.similarity.target = s.value("target", c.similarity.target);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("endpoint config: ") + e.what());
  }
  c.validate();
  return c;
}

Json ModelEndpointConfig::to_json() const {
  return Json{{"base_url", base_url},
              {"model", model},
              {"api_key_env", api_key_env},
              {"max_concurrency", max_concurrency},
              {"retry",
               {{"max_attempts", retry.max_attempts},
                {"initial_backoff_s", retry.initial_backoff_s},
                {"backoff_multiplier", retry.backoff_multiplier}}},
              {"timeout_s", timeout_s},
              {"temperature", temperature},
              {"similarity", {{"rules", similarity.rules}, {"initial", similarity.initial}, {"target", similarity.target}}},
              {"correction_message", correction_message}};
}

HttpChatClient::HttpChatClient(ModelEndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument, "base_url must look like http(s)://host[:port][/path]");
  }
  origin_ = m[1];
  std::string prefix = m[2];
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
  if (!config_.api_key_env.empty()) {
    if (const char* t = std::getenv(config_.api_key_env.c_str())) token_ = t;
  }
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  const std::string body = chat_request_body(config_, messages).dump();
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  std::string last_error;
  double backoff = config_.retry.initial_backoff_s;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= config_.retry.backoff_multiplier;
    }
    httplib::Client cli(origin_);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    auto res = cli.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return chat_response_text(res->body);
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
    const bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
    if (!retryable) break;
  }
  throw Error(ErrorCode::kTransport, last_error);
}

Json chat_request_body(const ModelEndpointConfig& config, const std::vector<ChatMessage>& messages) {
  Json msgs = Json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return Json{{"model", config.model}, {"messages", std::move(msgs)}, {"temperature", config.temperature}};
}

std::string chat_response_text(const std::string& body) {
  try {
    auto j = Json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::kTransport, "response content is not text");
    return content.get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kTransport, std::string("unexpected response body: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Parsing and comparison

Plan parse_plan(std::string_view text) {
  auto j = find_last_json(text, '[');
  if (!j) throw Error(ErrorCode::kNoJsonFound, "no JSON array in the response");
  return plan_from_json(*j);
}

TaskGraph parse_extracted_graph(std::string_view text) {
  auto j = find_last_json(text, '{');
  if (!j) throw Error(ErrorCode::kNoJsonFound, "no JSON object in the response");
  return graph_from_json(*j);
}

GraphSimilarity graph_similarity(const TaskGraph& extracted, const TaskGraph& gold, const SimilarityWeights& weights) {
  const auto a = rule_multiset(extracted);
  const auto b = rule_multiset(gold);
  long inter = 0, uni = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      uni += (ia++)->second;
    } else if (ia == a.end() || ib->first < ia->first) {
      uni += (ib++)->second;
    } else {
      inter += std::min(ia->second, ib->second);
      uni += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  GraphSimilarity s;
  s.rule_jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  const bool same_initial = sorted_initial(extracted) == sorted_initial(gold);
  const bool same_target = extracted.target() == gold.target();
  s.exact_match = a == b && same_initial && same_target;
  s.similarity = weights.rules * s.rule_jaccard + weights.initial * (same_initial ? 1.0 : 0.0) +
                 weights.target * (same_target ? 1.0 : 0.0);
  return s;
}

std::string mismatch_report(const TaskGraph& extracted, const TaskGraph& gold) {
  std::ostringstream out;
  auto a = rule_multiset(extracted);
  auto b = rule_multiset(gold);
  for (const auto& [key, count] : b) {
    const int have = a.count(key) ? a[key] : 0;
    for (int i = have; i < count; ++i) out << "- missing rule " << describe(key) << '\n';
  }
  for (const auto& [key, count] : a) {
    const int want = b.count(key) ? b[key] : 0;
    for (int i = want; i < count; ++i) out << "- unexpected rule " << describe(key) << '\n';
  }
  if (sorted_initial(extracted) != sorted_initial(gold)) {
    out << "- initial sources should be [" << join_nodes(sorted_initial(gold)) << "], found ["
        << join_nodes(sorted_initial(extracted)) << "]\n";
  }
  if (!(extracted.target() == gold.target())) {
    out << "- target should be " << gold.target().str() << ", found " << extracted.target().str() << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Evaluation runs

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kPlanDirect: return "plan-direct";
    case Pipeline::kPlanOnGraph: return "plan-on-graph";
    case Pipeline::kExtractThenPlan: return "extract-then-plan";
  }
  return "?";
}

Pipeline parse_pipeline(std::string_view s) {
  if (s == "plan-direct" || s == "PlanDirect") return Pipeline::kPlanDirect;
  if (s == "plan-on-graph" || s == "PlanOnGraph") return Pipeline::kPlanOnGraph;
  if (s == "extract-then-plan" || s == "ExtractThenPlan") return Pipeline::kExtractThenPlan;
  throw Error(ErrorCode::kInvalidArgument, "unknown pipeline '" + std::string(s) + "'");
}

EvalInstance EvalInstance::from_json(const Json& j, const std::string& fallback_id) {
  if (!j.is_object() || !j.contains("graph")) {
    throw Error(ErrorCode::kSchemaMismatch, "instance " + fallback_id + ": expected an object with a \"graph\"");
  }
  EvalInstance inst{fallback_id, graph_from_json(j["graph"]), std::nullopt, std::nullopt, std::nullopt};
  try {
    if (j.contains("id")) inst.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (j.contains("query") && !j["query"].is_null()) inst.query = j["query"].get<std::string>();
    if (j.contains("optimal") && j["optimal"].contains("makespan")) {
      inst.opt = PlanValue{j["optimal"]["makespan"].get<std::int64_t>(), j["optimal"]["cost"].get<std::int64_t>()};
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, "instance " + fallback_id + ": " + e.what());
  }
  if (j.contains("meta") && !j["meta"].is_null()) inst.meta = meta_from_json(j["meta"]);
  return inst;
}

Json EvalCase::verdict_json() const {
  Json j;
  j["id"] = id;
  j["status"] = std::string(to_string(verdict.status));
  Json errors = Json::array();
  for (auto e : verdict.errors) errors.push_back(std::string(to_string(e)));
  j["errors"] = std::move(errors);
  if (verdict.schedule) {
    j["makespan"] = verdict.schedule->makespan;
    j["cost"] = verdict.schedule->total_cost;
    j["duration_sum"] = verdict.schedule->duration_sum;
  }
  j["opt"] = parplan::to_json(opt);
  j["redundant_subtasks"] = verdict.redundant_subtasks;
  if (extraction) j["extraction"] = similarity_json(*extraction);
  if (failure) j["failure"] = *failure;
  j["meta"] = meta ? parplan::to_json(*meta) : Json();
  return j;
}

EvalRun run_eval(const std::vector<EvalInstance>& instances, Pipeline pipeline, ChatClient& client,
                 const ModelEndpointConfig& config, const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  if (instances.empty()) throw Error(ErrorCode::kEmptyRun, "no instances to evaluate");
  EvalRun run;
  run.cases.resize(instances.size());
  parallel_for(instances.size(), config.max_concurrency, [&](std::size_t i) {
    try {
      run.cases[i] = evaluate_one(instances[i], pipeline, client, config);
    } catch (const std::exception& e) {
      // Anything unexpected (e.g. an unsolvable gold graph) still only
      // fails this case.
      EvalCase c;
      c.id = instances[i].id;
      c.meta = instances[i].meta;
      if (instances[i].opt) c.opt = *instances[i].opt;
      c.verdict = PlanVerdict::failed(PlanError::kMalformedPlan);
      c.failure = e.what();
      run.cases[i] = std::move(c);
    }
  });

  std::vector<CaseOutcome> outcomes;
  std::vector<MetricRow> rows;
  for (const auto& c : run.cases) {
    auto outcome = CaseOutcome::from(c.verdict, c.opt);
    outcomes.push_back(outcome);
    if (!c.verdict.succeeded()) ++run.failed;
    MetricRow row{outcome, c.meta.value_or(InstanceMeta{}), std::nullopt};
    if (c.verdict.schedule && c.verdict.schedule->duration_sum > 0) {
      row.parallel_ratio = Rational(c.verdict.schedule->makespan, c.verdict.schedule->duration_sum);
    }
    rows.push_back(row);
  }
  run.report = score_run(outcomes);

  if (out_dir) {
    std::string responses, verdicts;
    for (const auto& c : run.cases) {
      for (const auto& ex : c.exchanges) {
        Json line{{"id", c.id}, {"pipeline", std::string(to_string(pipeline))}, {"stage", ex.stage},
                  {"prompt", ex.prompt}};
        line["response"] = ex.response ? Json(*ex.response) : Json();
        if (ex.error) line["error"] = *ex.error;
        responses += line.dump() + "\n";
      }
      verdicts += c.verdict_json().dump() + "\n";
    }
    GroupRow overall{"all", run.report, std::nullopt};
    Rational ratio_sum = 0;
    long ratio_count = 0;
    for (const auto& r : rows) {
      if (r.parallel_ratio) {
        ratio_sum += *r.parallel_ratio;
        ++ratio_count;
      }
    }
    if (ratio_count > 0) overall.mean_parallel_ratio = ratio_sum / ratio_count;
    Json report = run.report.to_json();
    report["pipeline"] = std::string(to_string(pipeline));
    report["model"] = config.model;
    write_file_atomic(*out_dir / "responses.jsonl", responses);
    write_file_atomic(*out_dir / "verdicts.jsonl", verdicts);
    write_file_atomic(*out_dir / "report.csv", to_csv({overall}));
    write_file_atomic(*out_dir / "report.json", report.dump(2) + "\n");
  }
  return run;
}

// ---------------------------------------------------------------------------
// Query generation with self-correction

Json QueryRound::to_json() const {
  Json j{{"round", round}, {"story", story}};
  j["extraction_response"] = extraction_response ? Json(*extraction_response) : Json();
  j["similarity"] = similarity ? similarity_json(*similarity) : Json();
  if (error) j["error"] = *error;
  if (!report.empty()) j["report"] = report;
  return j;
}

Json QueryGeneration::to_json() const {
  Json rounds_json = Json::array();
  for (const auto& r : rounds) rounds_json.push_back(r.to_json());
  return Json{{"story", story}, {"similarity", similarity_json(similarity)}, {"rounds", std::move(rounds_json)}};
}

QueryGeneration generate_query(const TaskGraph& graph, ChatClient& client, const ModelEndpointConfig& config,
                               int max_rounds) {
  if (max_rounds < 1) throw Error(ErrorCode::kInvalidArgument, "max_rounds must be >= 1");
  const std::string graph_text = pretty_json(graph);
  std::vector<ChatMessage> conversation{
      {"user", render_prompt(prompt_template(PromptKind::kGenerateQuery),
                             standard_bindings(PromptKind::kGenerateQuery, graph_text))}};
  std::vector<QueryRound> rounds;
  std::optional<QueryGeneration> best;

  for (int round = 1; round <= max_rounds; ++round) {
    QueryRound r;
    r.round = round;
    try {
      r.story = client.complete(conversation);
      const auto trimmed_end = r.story.find_last_not_of(" \t\r\n");
      r.story.erase(trimmed_end == std::string::npos ? 0 : trimmed_end + 1);
      r.story.erase(0, std::min(r.story.size(), r.story.find_first_not_of(" \t\r\n")));
      conversation.push_back({"assistant", r.story});

      auto extract_prompt = render_prompt(prompt_template(PromptKind::kExtractGraph),
                                          standard_bindings(PromptKind::kExtractGraph, r.story));
      r.extraction_response = client.complete({{"user", extract_prompt}});
      const auto extracted = parse_extracted_graph(*r.extraction_response);
      r.similarity = graph_similarity(extracted, graph, config.similarity);
      r.report = mismatch_report(extracted, graph);
    } catch (const std::exception& e) {
      r.error = e.what();
      r.report = std::string("- the rules could not be read back from the story (") + e.what() + ")\n";
      if (conversation.back().role != "assistant") conversation.push_back({"assistant", r.story});
    }
    rounds.push_back(r);

    if (r.similarity && (!best || r.similarity->similarity > best->similarity.similarity)) {
      best = QueryGeneration{r.story, *r.similarity, {}};
    }
    if (r.similarity && r.similarity->exact_match) break;
    if (round < max_rounds) {
      conversation.push_back({"user", replace_all(config.correction_message, "{report}", r.report)});
    }
  }

  if (best) best->rounds = rounds;
  if (!best || !best->similarity.exact_match) {
    std::string msg = "no exact round trip in " + std::to_string(rounds.size()) + " round(s)";
    if (best) msg += "; best similarity " + std::to_string(best->similarity.similarity);
    throw AllRoundsFailed(msg, std::move(best), std::move(rounds));
  }
  return *best;
}

}  // namespace parplan

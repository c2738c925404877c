#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parplan/evaluator.hpp"
#include "parplan/graphgen.hpp"
#include "parplan/json_io.hpp"
#include "parplan/metrics.hpp"
#include "parplan/prompts.hpp"

namespace parplan {

struct RetryPolicy {
  int max_attempts = 3;
  double initial_backoff_s = 1.0;
  double backoff_multiplier = 2.0;
};

struct SimilarityWeights {
  double rules = 0.8;
  double initial = 0.1;
  double target = 0.1;
};

struct ModelEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";  // POSTs to <base_url>/chat/completions
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";  // empty: send no auth header
  unsigned max_concurrency = 4;
  RetryPolicy retry;
  double timeout_s = 120.0;
  double temperature = 0.0;
  SimilarityWeights similarity;
  // Follow-up message for query self-correction; {report} is replaced by
  // the mismatch report.
  std::string correction_message =
      "The story above does not describe the task exactly. Reading the rules back from it gave these "
      "differences:\n{report}\nRewrite the story so that it matches the task exactly. Output only the story.";

  // Throws kInvalidArgument: concurrency >= 1, attempts >= 1, positive
  // timeout, non-negative backoff and weights summing to 1.
  void validate() const;
  static ModelEndpointConfig from_json(const Json& j);  // missing keys keep defaults
  Json to_json() const;
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant text. Throws kTransport when no answer could be
  // obtained.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// Chat-completions over HTTP(S). Retries transport errors, 408, 429 and 5xx
// with exponential backoff; the bearer token is read from the configured
// environment variable at construction.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(ModelEndpointConfig config);
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  ModelEndpointConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // .../chat/completions
  std::string token_;
};

// Request body and response decoding, exposed for testing.
Json chat_request_body(const ModelEndpointConfig& config, const std::vector<ChatMessage>& messages);
std::string chat_response_text(const std::string& body);

// Last well-formed JSON array in the response, decoded as a plan.
// Throws kNoJsonFound or kSchemaMismatch.
Plan parse_plan(std::string_view text);

// Last well-formed JSON object in the response, decoded as a task graph.
// Throws kNoJsonFound, kSchemaMismatch or kInvariantViolation.
TaskGraph parse_extracted_graph(std::string_view text);

struct GraphSimilarity {
  bool exact_match = false;
  double similarity = 0.0;
  double rule_jaccard = 0.0;
};

// Rules are compared as multisets of (sorted sources, target, time, cost);
// ids are ignored.
GraphSimilarity graph_similarity(const TaskGraph& extracted, const TaskGraph& gold,
                                 const SimilarityWeights& weights = {});

// Human-readable list of differences, one per line; empty when equal.
std::string mismatch_report(const TaskGraph& extracted, const TaskGraph& gold);

enum class Pipeline { kPlanDirect, kPlanOnGraph, kExtractThenPlan };
std::string_view to_string(Pipeline p);
Pipeline parse_pipeline(std::string_view s);  // plan-direct | plan-on-graph | extract-then-plan

struct EvalInstance {
  std::string id;
  TaskGraph graph;                   // gold
  std::optional<std::string> query;  // needed by plan-direct and extract-then-plan
  std::optional<PlanValue> opt;      // solved when absent
  std::optional<InstanceMeta> meta;

  // Accepts {"id"?, "graph", "query"?, "optimal"?: {"makespan","cost"}, "meta"?};
  // dataset instance lines qualify. `fallback_id` names lines without an id.
  static EvalInstance from_json(const Json& j, const std::string& fallback_id);
};

struct Exchange {
  std::string stage;  // "plan" | "extract"
  std::string prompt;
  std::optional<std::string> response;
  std::optional<std::string> error;
};

struct EvalCase {
  std::string id;
  PlanValue opt;
  std::vector<Exchange> exchanges;
  std::optional<Plan> plan;
  PlanVerdict verdict;
  std::optional<GraphSimilarity> extraction;
  std::optional<std::string> failure;  // why no plan was scored
  std::optional<InstanceMeta> meta;

  Json verdict_json() const;
};

struct EvalRun {
  std::vector<EvalCase> cases;  // instance order
  RunReport report;
  std::size_t failed = 0;
};

// Per-instance failures become Failed cases; the run never aborts on them.
// At most config.max_concurrency instances talk to the client at once.
// When `out_dir` is given, responses.jsonl, verdicts.jsonl, report.csv and
// report.json are written there atomically.
EvalRun run_eval(const std::vector<EvalInstance>& instances, Pipeline pipeline, ChatClient& client,
                 const ModelEndpointConfig& config,
                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct QueryRound {
  int round = 0;
  std::string story;
  std::optional<std::string> extraction_response;
  std::optional<GraphSimilarity> similarity;
  std::optional<std::string> error;
  std::string report;  // mismatch report fed into the next round

  Json to_json() const;
};

struct QueryGeneration {
  std::string story;  // best-similarity story
  GraphSimilarity similarity;
  std::vector<QueryRound> rounds;

  Json to_json() const;
};

// Carries everything gathered when no round matched exactly.
class AllRoundsFailed : public Error {
 public:
  AllRoundsFailed(const std::string& message, std::optional<QueryGeneration> best, std::vector<QueryRound> rounds)
      : Error(ErrorCode::kAllRoundsFailed, message), best_(std::move(best)), rounds_(std::move(rounds)) {}

  const std::optional<QueryGeneration>& best() const noexcept { return best_; }
  const std::vector<QueryRound>& rounds() const noexcept { return rounds_; }

 private:
  std::optional<QueryGeneration> best_;
  std::vector<QueryRound> rounds_;
};

// Writes a story with GenerateQuery, reads it back with ExtractGraph and
// compares with the graph; on mismatch the conversation continues with the
// mismatch report, for at most `max_rounds` rounds.
QueryGeneration generate_query(const TaskGraph& graph, ChatClient& client, const ModelEndpointConfig& config,
                               int max_rounds);

}  // namespace parplan

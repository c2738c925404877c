#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parplan {

enum class ErrorCode {
  kInvalidArgument,
  kInvariantViolation,
  kUnmatchedRule,
  kMalformedPlan,
  kInfeasibleEdgeCount,
  kDegenerateGraph,
  kUnreachableTarget,
  kTooLarge,
  kEmptyRun,
  kEmptyPlan,
  kDegenerateInput,
  kMissingBinding,
  kNoJsonFound,
  kSchemaMismatch,
  kAllRoundsFailed,
  kTransport,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the CLI,
// the Python module) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace parplan

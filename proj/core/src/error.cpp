#include "conjoint/error.hpp"

namespace conjoint {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_design: return "invalid-design";
    case ErrorCode::invalid_plan: return "invalid-plan";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::io: return "io";
    case ErrorCode::corrupt_duplicate: return "corrupt-duplicate";
    case ErrorCode::incompatible_design: return "incompatible-design";
    case ErrorCode::experiment_mismatch: return "experiment-mismatch";
    case ErrorCode::singular_design: return "singular-design";
    case ErrorCode::degrees_of_freedom: return "degrees-of-freedom";
    case ErrorCode::invalid_scope: return "invalid-scope";
    case ErrorCode::insufficient_replication: return "insufficient-replication";
    case ErrorCode::undefined_oracle: return "undefined-oracle";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::layout: return "layout";
  }
  return "unknown";
}

bool is_runtime_failure(ErrorCode code) {
  return code == ErrorCode::io || code == ErrorCode::protocol;
}

}  // namespace conjoint

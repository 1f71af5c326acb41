#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conjoint {

enum class ErrorCode {
  invalid_design,
  invalid_plan,
  configuration,
  protocol,
  io,
  corrupt_duplicate,
  incompatible_design,
  experiment_mismatch,
  singular_design,
  degrees_of_freedom,
  invalid_scope,
  insufficient_replication,
  undefined_oracle,
  invalid_input,
  layout,
};

std::string_view to_string(ErrorCode code);

// User/config problems map to exit code 1, runtime (network, file) failures to 2.
bool is_runtime_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conjoint

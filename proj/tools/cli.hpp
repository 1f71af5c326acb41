#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace conjoint::cli {

// Exit codes: 0 success, 1 user/config error, 2 runtime (network/IO) failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conjoint::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cobra/error.hpp"

namespace cobra {

/// Stable process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitPolicyError = 3,
  kExitStatisticalError = 4,
};

int exit_code_for(ErrorCode code) noexcept;

/// Runs the command line `args` (args[0] is the program name) and returns
/// the exit status. Diagnostics go to `err`, summaries to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cobra

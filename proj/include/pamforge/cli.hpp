#pragma once

#include <iosfwd>

namespace pamforge {

// Exit codes of the pamforge tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitConfigError = 2,
  kExitPartialFailure = 3,
  kExitFatalIo = 4,
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pamforge

#pragma once

#include <string>
#include <vector>

namespace modsafe {

/// Runs the command-line app on the given arguments (program name excluded).
/// Exit codes: 0 success, 2 usage or configuration error, 3 at least one run
/// aborted, 4 a --strict assertion failed.
int run_cli(const std::vector<std::string>& args);

}  // namespace modsafe

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace speye::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitOnlyMisses = 2,
    kExitFetchFailed = 3,
};

/// Runs one invocation. `args` excludes the program name. Reports go to
/// `out` (or --output), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace speye::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace taintflow::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kClean = 0,    // ran, nothing reported
  kFindings = 1, // at least one finding
  kError = 2,    // usage, parse, SSA or spec error
};

/// Runs the tool on `args` (program name excluded). Reports go to `out`,
/// dumps and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

} // namespace taintflow::cli

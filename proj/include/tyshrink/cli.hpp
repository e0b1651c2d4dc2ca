#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tyshrink::cli {

/// Process exit statuses.
enum ExitCode : int {
    kSuccess = 0,
    kUsage = 2,       // bad flags or malformed input
    kNumeric = 3,     // estimator failure
    kDegenerate = 4,  // degenerate data or labels
};

/// Runs the command line `args` (args[0] is the program name). Human-readable
/// key=value results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tyshrink::cli

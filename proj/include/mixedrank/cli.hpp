#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixedrank {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_analysis_error = 1, exit_usage_error = 2 };

/// Run the command-line tool in-process. `args` excludes the program name.
/// Results go to `out` and files under --out-dir; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixedrank

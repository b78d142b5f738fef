#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace strider::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

/// Runs one `strider` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace strider::cli
